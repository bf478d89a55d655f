#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hca/mdp.hpp"

namespace hca {

/// Turns one sampled episode into an update sample.
using EpisodeEstimator = std::function<UpdateEstimate(const Trajectory& episode)>;

struct McOptions {
  long long episodes = 100'000;
  std::uint64_t seed = 0;
  int max_episode_steps = 100'000;
  int block_size = 1024;  // episodes per independently seeded block
};

/// Sample mean and per-component standard error of an episode estimator.
struct McEstimate {
  UpdateEstimate mean;
  std::vector<double> std_error;  // S×A
  long long samples = 0;
  long long truncated = 0;        // episodes cut at max_episode_steps
};

/// Episodes are drawn in blocks, each block from its own derived stream, and
/// block sums are reduced in block order, so the result does not depend on
/// the thread count.
McEstimate monte_carlo_update(const TabularMdp& mdp, const PolicyTable& policy,
                              const EpisodeEstimator& estimator, const McOptions& options);

/// Components whose sample mean is more than `k` standard errors from `exact`.
/// Zero-variance components must match to `abs_tol`.
struct McComparison {
  int violations = 0;
  double worst_z = 0.0;
  int components = 0;
};
McComparison compare_to_exact(const McEstimate& estimate, const UpdateEstimate& exact, double k,
                              double abs_tol = 1e-12);

}  // namespace hca
