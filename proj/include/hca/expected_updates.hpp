#pragma once

#include "hca/hindsight.hpp"
#include "hca/mdp.hpp"

namespace hca {

// Expectations of the hindsight estimators over whole episodes, computed by
// enumeration over the live chain instead of sampling:
//
//   Σ_s d_γ(s) Σ_a ∇log π(a|s) E[ Σ_{k≥t} γ^{k−t} C_k(a) x_k | S_t = s ].
//
// The offset range comes from the oracle; it must cover the horizon at which
// the remaining discounted mass is negligible (see hindsight_horizon).

/// Credit h_Δ(a | S_t, S_{k+1}) with Δ = k + 1 − t on the raw rewards.
UpdateEstimate expected_next_state_credit_update(const TabularMdp& mdp, const PolicyTable& policy,
                                                 const ExactHindsight& oracle);

/// Same credit on augmented rewards γ V(S_{k+1}) + R_k − V(S_k).
UpdateEstimate expected_state_credit_value_update(const TabularMdp& mdp, const PolicyTable& policy,
                                                  const ValueTable& value,
                                                  const ExactHindsight& oracle);

/// Credit P(A_t = a | S_t, S_k, A_k, S_{k+1}) with Δ = k − t. With `value`,
/// rewards are replaced by augmented rewards.
UpdateEstimate expected_transition_credit_update(const TabularMdp& mdp, const PolicyTable& policy,
                                                 const TransitionHindsight& oracle,
                                                 const ValueTable* value = nullptr);

}  // namespace hca
