#include <algorithm>
#include <cmath>

#include "hca/reference.hpp"
#include "hca/rng.hpp"

namespace hca {

McEstimate monte_carlo_update_serial(const TabularMdp& mdp, const PolicyTable& policy,
                                     const EpisodeEstimator& estimator, const McOptions& options) {
  if (options.episodes < 2) throw ConfigError("monte_carlo_update: need at least 2 episodes");
  if (options.block_size < 1) throw ConfigError("monte_carlo_update: block_size must be positive");
  policy.check_matches(mdp);
  const std::size_t n = static_cast<std::size_t>(mdp.n_states()) * mdp.n_actions();
  McEstimate est;
  est.mean = UpdateEstimate(mdp.n_states(), mdp.n_actions());
  std::vector<double> sum_sq(n, 0.0);
  // Same block streams and the same summation order as the parallel kernel.
  for (long long first = 0, b = 0; first < options.episodes; first += options.block_size, ++b) {
    Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(b)));
    std::vector<double> sum(n, 0.0), sq(n, 0.0), weight(static_cast<std::size_t>(mdp.n_states()), 0.0);
    const long long last = std::min(options.episodes, first + options.block_size);
    for (long long e = first; e < last; ++e) {
      const Trajectory episode = sample_trajectory(mdp, policy, rng, options.max_episode_steps);
      if (episode.truncated) ++est.truncated;
      const UpdateEstimate u = estimator(episode);
      for (std::size_t i = 0; i < n; ++i) {
        sum[i] += u.grad[i];
        sq[i] += u.grad[i] * u.grad[i];
      }
      for (std::size_t s = 0; s < weight.size(); ++s) weight[s] += u.weight[s];
    }
    for (std::size_t i = 0; i < n; ++i) {
      est.mean.grad[i] += sum[i];
      sum_sq[i] += sq[i];
    }
    for (std::size_t s = 0; s < weight.size(); ++s) est.mean.weight[s] += weight[s];
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

}  // namespace hca
