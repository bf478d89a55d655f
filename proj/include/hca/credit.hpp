#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hca/hindsight.hpp"
#include "hca/mdp.hpp"

namespace hca {

/// Context for one credit lookup C(a | s_t, future).
///
/// `offset` is the number of steps from s_t to `future`. When the estimator
/// conditions on a transition (s_k, a_k, future), `has_transition` is set and
/// the transition starts `offset − 1` steps after s_t.
struct CreditQuery {
  int s_t = 0;
  int a_t = 0;
  int future = 0;
  int offset = 1;
  bool has_transition = false;
  int s_k = 0;
  int a_k = 0;
};

/// C(a | s_t, ·) = [A_t = a].
struct IndicatorCredit {};

/// [A_t = a] within `n` steps of s_t, π(a | s_t) beyond.
struct NStepIndicatorCredit {
  int n = 1;
};

/// Learned h_φ, optionally clipped at λ π.
struct LearnedCredit {
  const CreditModel* model = nullptr;
  const PolicyTable* policy = nullptr;
  std::optional<double> clip_lambda;
};

/// Offset-indexed exact hindsight h_Δ(a | s_t, s_{t+Δ}).
struct ExactStateCredit {
  const ExactHindsight* oracle = nullptr;
};

/// Exact P(A_t = a | S_t, S_k, A_k, S_{k+1}); needs transition context.
struct ExactTransitionCredit {
  const TransitionHindsight* oracle = nullptr;
};

/// Future-independent c(a | s), flat S×A.
struct FixedCredit {
  int n_actions = 0;
  std::vector<double> table;
};

using CreditFunction = std::variant<IndicatorCredit, NStepIndicatorCredit, LearnedCredit,
                                    ExactStateCredit, ExactTransitionCredit, FixedCredit>;

/// Writes C(· | query) into `out`. `pi_t` is π(· | s_t) of the policy being updated.
void credit_weights(const CreditFunction& credit, const CreditQuery& query,
                    std::span<const double> pi_t, std::span<double> out);

std::string credit_name(const CreditFunction& credit);

}  // namespace hca
