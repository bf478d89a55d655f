#pragma once

#include <span>
#include <vector>

#include "hca/mdp.hpp"

namespace hca {

/// Exact hindsight distributions h_Δ(a | s, s') = P(A_t = a | S_t = s, S_{t+Δ} = s')
/// for Δ = 1..delta_max, on the live chain (an episode has no positions past
/// the step that enters a terminal state).
class ExactHindsight {
 public:
  ExactHindsight() = default;

  int delta_max() const noexcept { return delta_max_; }
  int n_states() const noexcept { return n_states_; }
  int n_actions() const noexcept { return n_actions_; }

  /// P(S_{t+Δ} = s' | S_t = s) under π.
  double reach(int delta, int s, int future) const;
  /// P(S_{t+Δ} = s' | S_t = s, A_t = a).
  double reach_given_action(int delta, int s, int a, int future) const;
  bool defined(int delta, int s, int future) const { return reach(delta, s, future) > 0.0; }

  /// Row h_Δ(· | s, s'); throws UnreachablePairError when reach is zero.
  std::span<const double> probs(int delta, int s, int future) const;
  double prob(int delta, int s, int future, int a) const { return probs(delta, s, future)[a]; }

  /// π(a | s) rows the oracle was built against.
  std::span<const double> prior(int s) const {
    return {pi_.data() + static_cast<std::size_t>(s) * n_actions_, static_cast<std::size_t>(n_actions_)};
  }

 private:
  friend ExactHindsight exact_hindsight(const TabularMdp&, const PolicyTable&, int);
  friend ExactHindsight exact_hindsight_serial(const TabularMdp&, const PolicyTable&, int);

  std::size_t cube(int delta, int s, int a, int future) const;
  std::size_t square(int delta, int s, int future) const;
  void check_delta(int delta) const;

  int delta_max_ = 0;
  int n_states_ = 0;
  int n_actions_ = 0;
  std::vector<double> pi_;           // S×A
  std::vector<double> reach_action_; // Δ×S×A×S'
  std::vector<double> reach_;        // Δ×S×S'
  std::vector<double> h_;            // Δ×S×S'×A
};

/// Forward DP over action-conditioned Δ-step distributions, then Bayes with
/// prior π. Parallel over source states.
ExactHindsight exact_hindsight(const TabularMdp& mdp, const PolicyTable& policy, int delta_max);

/// Smallest offset bound such that the discounted live mass left beyond it,
/// times max|r| / (1 − γ), is below `tol`. Capped at `cap`.
int hindsight_horizon(const TabularMdp& mdp, const PolicyTable& policy, double tol = 1e-13,
                      int cap = 5000);

/// P(A_t = a | S_t = s, S_k = x, A_k = b, S_{k+1} = y) for offsets Δ = k − t in
/// 0..delta_max. Only the action-conditioned occupancies are stored; rows are
/// formed by Bayes on demand, so unreachable tuples cost nothing.
class TransitionHindsight {
 public:
  TransitionHindsight() = default;

  int delta_max() const noexcept { return delta_max_; }

  /// P(S_k = x, A_k = b, S_{k+1} = y | S_t = s, A_t = a).
  double joint_given_action(int delta, int s, int a, int x, int b, int y) const;
  /// Same, marginalised over A_t under π.
  double joint(int delta, int s, int x, int b, int y) const;
  bool defined(int delta, int s, int x, int b, int y) const { return joint(delta, s, x, b, y) > 0.0; }

  /// Writes the conditional row into `out`; throws UnreachablePairError when
  /// the tuple has probability zero.
  void probs(int delta, int s, int x, int b, int y, std::span<double> out) const;
  std::vector<double> probs(int delta, int s, int x, int b, int y) const;

 private:
  friend TransitionHindsight exact_transition_hindsight(const TabularMdp&, const PolicyTable&, int);

  double occupancy(int delta, int s, int a, int x) const;

  int delta_max_ = 0;
  int n_states_ = 0;
  int n_actions_ = 0;
  std::vector<double> pi_;          // S×A
  std::vector<double> transition_;  // S×A×S
  std::vector<bool> terminal_;
  std::vector<double> occupancy_;   // Δ≥1: Δ×S×A×X, live non-terminal x only
};

TransitionHindsight exact_transition_hindsight(const TabularMdp& mdp, const PolicyTable& policy,
                                               int delta_max);

// ---------------------------------------------------------------------------
// Learned credit

enum class CreditParametrization {
  PolicyPrior,  // h ∝ exp(g + log π)
  Plain,        // h = softmax(g)
};

/// Tabular credit residual g[s][s'][a]; horizon-agnostic.
class CreditModel {
 public:
  CreditModel(int n_states, int n_actions,
              CreditParametrization parametrization = CreditParametrization::PolicyPrior);

  int n_states() const noexcept { return n_states_; }
  int n_actions() const noexcept { return n_actions_; }
  CreditParametrization parametrization() const noexcept { return parametrization_; }

  std::span<const double> residual(int s, int future) const {
    return {g_.data() + row(s, future), static_cast<std::size_t>(n_actions_)};
  }
  std::span<double> residual(int s, int future) {
    return {g_.data() + row(s, future), static_cast<std::size_t>(n_actions_)};
  }
  const std::vector<double>& residuals() const noexcept { return g_; }
  std::vector<double>& residuals() noexcept { return g_; }

  void check_matches(const PolicyTable& policy) const;

 private:
  std::size_t row(int s, int future) const {
    return (static_cast<std::size_t>(s) * n_states_ + static_cast<std::size_t>(future)) *
           static_cast<std::size_t>(n_actions_);
  }

  int n_states_;
  int n_actions_;
  CreditParametrization parametrization_;
  std::vector<double> g_;
};

/// softmax(g[s_t][s_k][·] + log π(·|s_t)), or softmax(g) for the plain model.
void credit_prob(const CreditModel& model, const PolicyTable& policy, int s_t, int s_k,
                 std::span<double> out);
std::vector<double> credit_prob(const CreditModel& model, const PolicyTable& policy, int s_t,
                                int s_k);

struct CreditSample {
  int state = 0;
  int action = 0;
  int future = 0;
};

/// One gradient step on the mean cross-entropy of credit_prob against the
/// observed actions. Policy logits are constants. Returns the pre-step mean NLL.
double train_credit_model(CreditModel& model, const PolicyTable& policy,
                          std::span<const CreditSample> batch, double lr);

/// Mean NLL of the batch without updating.
double credit_nll(const CreditModel& model, const PolicyTable& policy,
                  std::span<const CreditSample> batch);

/// Gradient of the mean cross-entropy with respect to the residual table.
std::vector<double> credit_gradient(const CreditModel& model, const PolicyTable& policy,
                                    std::span<const CreditSample> batch);

/// min(h(a), λ π(a)) elementwise, no renormalisation.
void clip_credit(std::span<const double> h, std::span<const double> pi, double lambda,
                 std::span<double> out);
std::vector<double> clip_credit(std::span<const double> h, std::span<const double> pi,
                                double lambda);

}  // namespace hca
