#pragma once

#include <optional>
#include <vector>

#include "hca/credit.hpp"
#include "hca/hindsight.hpp"
#include "hca/mdp.hpp"
#include "hca/rng.hpp"

namespace hca {

/// Segments of at most T steps; a segment never spans an episode boundary.
/// A truncated segment bootstraps from the next-state of its last step.
struct RolloutBatch {
  std::vector<Trajectory> segments;

  bool empty() const noexcept;
  std::size_t total_steps() const noexcept;
  void validate() const;
};

/// Bootstrap state of a truncated segment, nullopt when it ended at a terminal.
std::optional<int> bootstrap_state(const Trajectory& segment);

/// Splits an episode into consecutive segments of at most `segment_length` steps.
RolloutBatch split_into_segments(const Trajectory& episode, int segment_length);

/// Steps an environment continuously and hands out T-step rollouts.
class RolloutSampler {
 public:
  RolloutSampler(const TabularMdp& mdp, int max_episode_steps);

  /// Collects `n_steps` environment steps under `policy`, cutting segments at
  /// episode ends. Episodes longer than max_episode_steps are truncated.
  RolloutBatch collect(const PolicyTable& policy, Rng& rng, int n_steps);

  long long episodes_finished() const noexcept { return episodes_finished_; }

 private:
  void reset(Rng& rng);

  const TabularMdp* mdp_;
  int max_episode_steps_;
  int state_ = -1;
  int episode_time_ = 0;
  long long episodes_finished_ = 0;
};

/// Learned immediate-reward regression r̂[s][a].
struct RewardModel {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> table;

  RewardModel() = default;
  RewardModel(int s, int a)
      : n_states(s), n_actions(a), table(static_cast<std::size_t>(s) * a, 0.0) {}
  double operator()(int s, int a) const {
    return table[static_cast<std::size_t>(s) * n_actions + a];
  }
  double& operator()(int s, int a) { return table[static_cast<std::size_t>(s) * n_actions + a]; }
};

/// γ V(s') [s' non-terminal] + r − V(s): the one-step bootstrapped advantage.
double augmented_reward(const ValueTable& value, int s, double r, int s_next, double gamma,
                        bool terminal);

/// Σ_t γ^t ∇log π(A_t|S_t) G_t. With `value`, truncated segments close with
/// γ^{L−t} V(bootstrap); without, they use the bare partial sum.
UpdateEstimate reinforce_update(const RolloutBatch& batch, const PolicyTable& policy, double gamma,
                                const ValueTable* value = nullptr);

/// Segment-length advantage per step, plus `entropy_coef` ∇H(π(·|S_t)).
UpdateEstimate a2c_update(const RolloutBatch& batch, const PolicyTable& policy,
                          const ValueTable& value, double gamma, double entropy_coef = 0.0);

/// Sliding-window N-step advantage.
UpdateEstimate n_step_a2c_update(const RolloutBatch& batch, const PolicyTable& policy,
                                 const ValueTable& value, double gamma, int n);

/// State HCA: immediate reward through π r̂, later rewards through C(a | S_t, S_k),
/// and γ^{L−t} C(a | S_t, S_L) V(S_L) on truncated segments when `value` is given.
UpdateEstimate hca_update(const RolloutBatch& batch, const PolicyTable& policy,
                          const CreditFunction& credit, const RewardModel& reward_model,
                          const ValueTable* value, double gamma);

/// Every reward R_k credited through C(a | S_t, S_{k+1}); no bootstrap.
UpdateEstimate deep_hca_update(const RolloutBatch& batch, const PolicyTable& policy,
                               const CreditFunction& credit, double gamma);

/// deep_hca_update with R_k replaced by augmented rewards.
UpdateEstimate hca_value_update(const RolloutBatch& batch, const PolicyTable& policy,
                                const ValueTable& value, const CreditFunction& credit,
                                double gamma);

/// Adds coef · ∇_θ H(π(·|S_t)) for every step in the batch.
void add_entropy_bonus(UpdateEstimate& update, const RolloutBatch& batch, const PolicyTable& policy,
                       double coef);

/// Moves V[s] toward the segment-length bootstrapped return by `lr`, averaging
/// targets of repeated states. Returns the pre-step mean squared residual.
double train_value(ValueTable& value, const RolloutBatch& batch, double gamma, double lr);

/// Moves r̂[s][a] toward observed rewards. Returns the pre-step mean squared residual.
double train_reward_model(RewardModel& model, const RolloutBatch& batch, double lr);

/// Clips the update to global norm `max_grad_norm` (≤ 0 disables) and ascends by `lr`.
void apply_update(PolicyTable& policy, const UpdateEstimate& update, double lr,
                  double max_grad_norm);

/// All (S_t, A_t, S_j) with t < j ≤ L inside each segment, where position L is
/// the next-state of the last step.
std::vector<CreditSample> collect_credit_samples(const RolloutBatch& batch);

}  // namespace hca
