#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hca/errors.hpp"
#include "hca/rng.hpp"

namespace hca {

enum class RewardKind { NextStateOnly, FullTransition };

std::string to_string(RewardKind kind);
RewardKind reward_kind_from_string(const std::string& text);

/// Finite MDP with dense P[s][a][s'] and r[s][a][s'] tables (row-major).
///
/// Terminal states absorb with probability 1 and zero reward. Episodes stop
/// on entry to a terminal state, so a terminal state is only ever observed as
/// the next-state of the final step. For NextStateOnly MDPs the reward of a
/// transition out of any non-terminal state depends on s' alone.
class TabularMdp {
 public:
  TabularMdp(int n_states, int n_actions, double gamma, RewardKind reward_kind,
             std::vector<double> transition, std::vector<double> reward,
             std::vector<bool> terminal, std::vector<double> initial_dist);

  int n_states() const noexcept { return n_states_; }
  int n_actions() const noexcept { return n_actions_; }
  double gamma() const noexcept { return gamma_; }
  RewardKind reward_kind() const noexcept { return reward_kind_; }
  bool is_terminal(int s) const { return terminal_[static_cast<std::size_t>(s)]; }
  const std::vector<bool>& terminal() const noexcept { return terminal_; }
  std::span<const double> initial_dist() const noexcept { return initial_; }

  double p(int s, int a, int next) const { return transition_[index(s, a, next)]; }
  double r(int s, int a, int next) const { return reward_[index(s, a, next)]; }

  std::span<const double> transition_row(int s, int a) const {
    return {transition_.data() + index(s, a, 0), static_cast<std::size_t>(n_states_)};
  }
  std::span<const double> reward_row(int s, int a) const {
    return {reward_.data() + index(s, a, 0), static_cast<std::size_t>(n_states_)};
  }
  const std::vector<double>& transition() const noexcept { return transition_; }
  const std::vector<double>& reward() const noexcept { return reward_; }

  /// Σ_{s'} P[s][a][s'] r[s][a][s'].
  double expected_reward(int s, int a) const;
  double max_abs_reward() const;

  /// Same dynamics with a different discount.
  TabularMdp with_gamma(double gamma) const;

 private:
  std::size_t index(int s, int a, int next) const {
    return (static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions_) +
            static_cast<std::size_t>(a)) * static_cast<std::size_t>(n_states_) +
           static_cast<std::size_t>(next);
  }

  int n_states_;
  int n_actions_;
  double gamma_;
  RewardKind reward_kind_;
  std::vector<double> transition_;
  std::vector<double> reward_;
  std::vector<bool> terminal_;
  std::vector<double> initial_;
};

/// Per-state action logits with softmax semantics.
class PolicyTable {
 public:
  PolicyTable(int n_states, int n_actions);
  PolicyTable(int n_states, int n_actions, std::vector<double> logits);

  static PolicyTable uniform(const TabularMdp& mdp) {
    return PolicyTable(mdp.n_states(), mdp.n_actions());
  }

  int n_states() const noexcept { return n_states_; }
  int n_actions() const noexcept { return n_actions_; }

  double logit(int s, int a) const { return logits_[flat(s, a)]; }
  double& logit(int s, int a) { return logits_[flat(s, a)]; }
  std::span<const double> row(int s) const {
    return {logits_.data() + flat(s, 0), static_cast<std::size_t>(n_actions_)};
  }
  const std::vector<double>& logits() const noexcept { return logits_; }
  std::vector<double>& logits() noexcept { return logits_; }

  /// softmax(row s) written into `out`.
  void probs(int s, std::span<double> out) const;
  std::vector<double> probs(int s) const;
  /// Flat S×A table of action probabilities.
  std::vector<double> probability_table() const;

  void check_matches(const TabularMdp& mdp) const;

 private:
  std::size_t flat(int s, int a) const {
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions_) +
           static_cast<std::size_t>(a);
  }

  int n_states_;
  int n_actions_;
  std::vector<double> logits_;
};

struct ValueTable {
  std::vector<double> values;

  ValueTable() = default;
  explicit ValueTable(int n_states) : values(static_cast<std::size_t>(n_states), 0.0) {}
  explicit ValueTable(std::vector<double> v) : values(std::move(v)) {}

  double operator[](int s) const { return values[static_cast<std::size_t>(s)]; }
  double& operator[](int s) { return values[static_cast<std::size_t>(s)]; }
  int size() const noexcept { return static_cast<int>(values.size()); }
};

/// Accumulated gradient with respect to policy logits.
struct UpdateEstimate {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> grad;    // S×A
  std::vector<double> weight;  // contributing timesteps per state

  UpdateEstimate() = default;
  UpdateEstimate(int n_states, int n_actions);

  double& at(int s, int a) {
    return grad[static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions) +
                static_cast<std::size_t>(a)];
  }
  double at(int s, int a) const {
    return grad[static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions) +
                static_cast<std::size_t>(a)];
  }

  UpdateEstimate& operator+=(const UpdateEstimate& other);
  UpdateEstimate& operator*=(double scale);
  double norm() const;
  double total_weight() const;
};

double max_abs_diff(const UpdateEstimate& a, const UpdateEstimate& b);

struct Step {
  int state = 0;
  int action = 0;
  double reward = 0.0;
  int next_state = 0;
  bool terminal = false;
};

/// Ordered transitions. `start_time` is the episode time of the first step,
/// so a segment cut from the middle of an episode keeps its γ^t weighting.
struct Trajectory {
  std::vector<Step> steps;
  bool truncated = false;
  int start_time = 0;

  std::size_t size() const noexcept { return steps.size(); }
  bool empty() const noexcept { return steps.empty(); }
  double total_reward() const;
  /// Throws ConfigError if steps do not chain or continue past a terminal.
  void validate() const;
};

Trajectory sample_trajectory(const TabularMdp& mdp, const PolicyTable& policy, Rng& rng,
                             int max_steps);
Trajectory sample_trajectory_from(const TabularMdp& mdp, const PolicyTable& policy, Rng& rng,
                                  int start_state, int max_steps);

/// Σ_{k≥t} γ^{k−t} R_k over the suffix of `traj`.
double discounted_return(const Trajectory& traj, std::size_t t, double gamma);

struct PolicyEvaluationOptions {
  double tol = 1e-12;
  int max_iterations = 1'000'000;
};

/// Iterative policy evaluation (synchronous sweeps, parallel over states).
ValueTable evaluate_policy(const TabularMdp& mdp, const PolicyTable& policy, double tol);
ValueTable evaluate_policy(const TabularMdp& mdp, const PolicyTable& policy,
                           const PolicyEvaluationOptions& options);

/// V^π from a direct linear solve over non-terminal states.
ValueTable solve_policy_values(const TabularMdp& mdp, const PolicyTable& policy);

/// Q(s,a) = Σ_{s'} P (r + γ V(s')), terminal V taken as 0. Flat S×A.
std::vector<double> action_values(const TabularMdp& mdp, const ValueTable& values);

/// Max over non-terminal s of |V(s) − (T^π V)(s)|.
double bellman_residual(const TabularMdp& mdp, const PolicyTable& policy,
                        const ValueTable& values);

struct ExactGradient {
  UpdateEstimate estimate;      // weight holds the discounted visitation d_γ(s)
  ValueTable values;
  int horizon_used = 0;
  double tail_bound = 0.0;      // γ^H · live mass at H · max|V|
  bool within_tolerance = true; // false when the horizon cut the sum early
};

/// Smallest H with γ^H · max|r| / (1 − γ) < tol, or `cap` when γ = 1.
int default_gradient_horizon(const TabularMdp& mdp, double tol = 1e-10, int cap = 200'000);

/// ∇_θ V^π(initial_dist) by DP: d_γ(s) π(b|s) (Q(s,b) − V(s)).
ExactGradient exact_policy_gradient(const TabularMdp& mdp, const PolicyTable& policy,
                                    int horizon);
ExactGradient exact_policy_gradient(const TabularMdp& mdp, const PolicyTable& policy);

/// Discounted live-state visitation Σ_t γ^t P(S_t = s, episode not ended).
std::vector<double> discounted_visitation(const TabularMdp& mdp, const PolicyTable& policy,
                                          int horizon, double* tail_mass = nullptr);

/// r'(s,a,s') = γ Φ(s') + r(s,a,s') − Φ(s).
TabularMdp shape_rewards(const TabularMdp& mdp, const ValueTable& potential);

struct ValueIterationResult {
  ValueTable values;
  std::vector<double> q;  // flat S×A
  int iterations = 0;
};

ValueIterationResult value_iteration(const TabularMdp& mdp, double tol = 1e-12,
                                     int max_iterations = 1'000'000);

/// Actions whose Q is within `tie_tol` of the row maximum.
std::vector<int> greedy_actions(const ValueIterationResult& vi, int n_actions, int s,
                                double tie_tol = 1e-9);

}  // namespace hca
