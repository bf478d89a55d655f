#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hca/diagnostics.hpp"

namespace hca {

struct CheckResult {
  std::string name;
  double value = 0.0;  // the measured quantity compared against `tol`
  double tol = 0.0;
  bool pass = false;
  std::string detail;
};

// Individual checks. Each draws its instances from `seed`.

/// Enumerated next-state-credit update vs the exact gradient on `n_random`
/// random NextStateOnly MDPs plus TwoArm, Chain3 and DelayedChain.
CheckResult check_next_state_theorem(int n_random, std::uint64_t seed, double tol = 1e-8);

/// Enumerated transition-credit update vs the exact gradient on `n_random`
/// random FullTransition MDPs plus the bundled ones. With `augmented`, rewards
/// are replaced by augmented rewards under the exact V^π.
CheckResult check_transition_theorem(int n_random, std::uint64_t seed, bool augmented,
                                     double tol = 1e-8);

/// hca_value_update(indicator) against a2c_update over random draws.
IdentityReport check_a2c_identity(int draws, std::uint64_t seed, double tol = 1e-12);

/// hca_value_update(n-step indicator) against n_step_a2c_update; `n` ≤ 0 means n = T.
IdentityReport check_n_step_identity(int draws, int n, std::uint64_t seed, double tol = 1e-12);

/// a2c_update with V ≡ 0 against reinforce_update on whole episodes.
IdentityReport check_zero_value_identity(int draws, std::uint64_t seed, double tol = 1e-12);

/// deep_hca_update(indicator) against reinforce_update on whole episodes.
IdentityReport check_deep_indicator_identity(int draws, std::uint64_t seed, double tol = 1e-12);

/// Per-position telescoping of discounted augmented rewards over sampled segments.
CheckResult check_telescoping(int draws, std::uint64_t seed, double tol = 1e-12);

/// Greedy action sets of shaped and unshaped FrozenLake (standard and penalty)
/// agree on every non-terminal state. Value reports the number of mismatches.
CheckResult check_shaping_invariance();

/// Zero-residual credit reproduces π on random models.
CheckResult check_zero_residual(std::uint64_t seed, double tol = 1e-12);

/// Credit trained on TwoArm data under the uniform policy: NLL of the rewarded
/// pair after training.
CheckResult check_two_arm_credit_training(std::uint64_t seed, double tol = 0.01);

/// Clipped credit never exceeds min(h, λπ), checked with exact comparisons.
CheckResult check_clip_bound(std::uint64_t seed, double lambda = 3.0);

/// Parallel kernels against the serial references.
CheckResult check_serial_parallel_agreement(std::uint64_t seed);

/// Cheap versions of every check above. `identities` collects the identity
/// reports for identity_report.csv.
std::vector<CheckResult> run_verification_suite(std::uint64_t seed,
                                                std::vector<IdentityReport>* identities = nullptr);

}  // namespace hca
