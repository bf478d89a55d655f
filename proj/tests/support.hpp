#pragma once

#include <random>
#include <vector>

#include "hca/agents.hpp"
#include "hca/envs.hpp"
#include "hca/mdp.hpp"

namespace hca::test {

inline PolicyTable random_policy(int n_states, int n_actions, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  PolicyTable p(n_states, n_actions);
  for (double& l : p.logits()) l = normal(rng.engine());
  return p;
}

inline PolicyTable random_policy(const TabularMdp& mdp, Rng& rng, double scale = 1.0) {
  return random_policy(mdp.n_states(), mdp.n_actions(), rng, scale);
}

inline ValueTable random_values(int n_states, Rng& rng) {
  ValueTable v(n_states);
  for (double& x : v.values) x = 2.0 * rng.uniform() - 1.0;
  return v;
}

/// J(θ) = Σ_s μ0(s) V^π(s) from a linear solve.
inline double objective(const TabularMdp& mdp, const PolicyTable& policy) {
  const ValueTable v = solve_policy_values(mdp, policy);
  double j = 0.0;
  for (int s = 0; s < mdp.n_states(); ++s) j += mdp.initial_dist()[s] * v[s];
  return j;
}

/// Central differences of J with respect to every logit.
inline std::vector<double> finite_difference_gradient(const TabularMdp& mdp, PolicyTable policy,
                                                      double h = 1e-5) {
  std::vector<double> out(policy.logits().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double keep = policy.logits()[i];
    policy.logits()[i] = keep + h;
    const double up = objective(mdp, policy);
    policy.logits()[i] = keep - h;
    const double down = objective(mdp, policy);
    policy.logits()[i] = keep;
    out[i] = (up - down) / (2.0 * h);
  }
  return out;
}

inline RolloutBatch sample_episodes(const TabularMdp& mdp, const PolicyTable& policy, Rng& rng,
                                    int episodes, int max_steps = 200) {
  RolloutBatch batch;
  for (int e = 0; e < episodes; ++e) batch.segments.push_back(sample_trajectory(mdp, policy, rng, max_steps));
  return batch;
}

}  // namespace hca::test
