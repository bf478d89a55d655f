#include "hca/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include "hca/errors.hpp"
#include "hca/rng.hpp"

namespace hca {

namespace {

struct BlockSums {
  std::vector<double> sum, sum_sq, weight;
  long long truncated = 0;
};

void check_options(const McOptions& options) {
  if (options.episodes < 2) throw ConfigError("monte_carlo_update: need at least 2 episodes");
  if (options.block_size < 1) throw ConfigError("monte_carlo_update: block_size must be positive");
  if (options.max_episode_steps < 1)
    throw ConfigError("monte_carlo_update: max_episode_steps must be positive");
}

}  // namespace

McEstimate monte_carlo_update(const TabularMdp& mdp, const PolicyTable& policy,
                              const EpisodeEstimator& estimator, const McOptions& options) {
  check_options(options);
  policy.check_matches(mdp);
  const std::size_t n = static_cast<std::size_t>(mdp.n_states()) * mdp.n_actions();
  const long long n_blocks = (options.episodes + options.block_size - 1) / options.block_size;
  std::vector<BlockSums> blocks(static_cast<std::size_t>(n_blocks));

#pragma omp parallel for schedule(dynamic)
  for (long long b = 0; b < n_blocks; ++b) {
    BlockSums& out = blocks[static_cast<std::size_t>(b)];
    out.sum.assign(n, 0.0);
    out.sum_sq.assign(n, 0.0);
    out.weight.assign(static_cast<std::size_t>(mdp.n_states()), 0.0);
    Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(b)));
    const long long first = b * options.block_size;
    const long long last = std::min(options.episodes, first + options.block_size);
    for (long long e = first; e < last; ++e) {
      const Trajectory episode = sample_trajectory(mdp, policy, rng, options.max_episode_steps);
      if (episode.truncated) ++out.truncated;
      const UpdateEstimate u = estimator(episode);
      for (std::size_t i = 0; i < n; ++i) {
        out.sum[i] += u.grad[i];
        out.sum_sq[i] += u.grad[i] * u.grad[i];
      }
      for (std::size_t s = 0; s < out.weight.size(); ++s) out.weight[s] += u.weight[s];
    }
  }

  McEstimate est;
  est.mean = UpdateEstimate(mdp.n_states(), mdp.n_actions());
  std::vector<double> sum_sq(n, 0.0);
  for (const BlockSums& block : blocks) {
    for (std::size_t i = 0; i < n; ++i) {
      est.mean.grad[i] += block.sum[i];
      sum_sq[i] += block.sum_sq[i];
    }
    for (std::size_t s = 0; s < block.weight.size(); ++s) est.mean.weight[s] += block.weight[s];
    est.truncated += block.truncated;
  }
  const double N = static_cast<double>(options.episodes);
  est.samples = options.episodes;
  est.std_error.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    est.mean.grad[i] /= N;
    const double var = std::max(0.0, (sum_sq[i] / N - est.mean.grad[i] * est.mean.grad[i])) * N / (N - 1.0);
    est.std_error[i] = std::sqrt(var / N);
  }
  for (double& w : est.mean.weight) w /= N;
  return est;
}

McComparison compare_to_exact(const McEstimate& estimate, const UpdateEstimate& exact, double k,
                              double abs_tol) {
  if (exact.grad.size() != estimate.mean.grad.size())
    throw ConfigError("compare_to_exact: shape mismatch");
  McComparison cmp;
  cmp.components = static_cast<int>(exact.grad.size());
  for (std::size_t i = 0; i < exact.grad.size(); ++i) {
    const double diff = std::abs(estimate.mean.grad[i] - exact.grad[i]);
    const double se = estimate.std_error[i];
    if (se <= 0.0) {
      if (diff > abs_tol) ++cmp.violations;
      continue;
    }
    const double z = diff / se;
    cmp.worst_z = std::max(cmp.worst_z, z);
    if (z > k) ++cmp.violations;
  }
  return cmp;
}

}  // namespace hca
