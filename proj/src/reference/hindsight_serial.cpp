#include <vector>

#include "hca/reference.hpp"

namespace hca {

// Joint q_Δ(a, y) = P(A_t = a, S_{t+Δ} = y | S_t = s), pushed forward one
// transition at a time, then normalised per y.
ExactHindsight exact_hindsight_serial(const TabularMdp& mdp, const PolicyTable& policy,
                                      int delta_max) {
  policy.check_matches(mdp);
  if (delta_max < 1) throw ConfigError("exact_hindsight: delta_max must be at least 1");
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  ExactHindsight out;
  out.delta_max_ = delta_max;
  out.n_states_ = S;
  out.n_actions_ = A;
  out.pi_ = policy.probability_table();
  const std::size_t D = static_cast<std::size_t>(delta_max);
  out.reach_action_.assign(D * S * A * S, 0.0);
  out.reach_.assign(D * S * S, 0.0);
  out.h_.assign(D * S * S * A, 0.0);

  for (int s = 0; s < S; ++s) {
    if (mdp.is_terminal(s)) continue;
    for (int a = 0; a < A; ++a) {
      std::vector<double> dist(static_cast<std::size_t>(S), 0.0);
      for (int y = 0; y < S; ++y) dist[y] = mdp.p(s, a, y);
      for (int d = 1; d <= delta_max; ++d) {
        for (int y = 0; y < S; ++y) out.reach_action_[out.cube(d, s, a, y)] = dist[y];
        std::vector<double> next(static_cast<std::size_t>(S), 0.0);
        for (int x = 0; x < S; ++x) {
          if (dist[x] == 0.0 || mdp.is_terminal(x)) continue;
          for (int b = 0; b < A; ++b)
            for (int y = 0; y < S; ++y)
              next[y] += dist[x] * out.pi_[static_cast<std::size_t>(x) * A + b] * mdp.p(x, b, y);
        }
        dist.swap(next);
      }
    }
    for (int d = 1; d <= delta_max; ++d) {
      for (int y = 0; y < S; ++y) {
        double total = 0.0;
        for (int a = 0; a < A; ++a)
          total += out.pi_[static_cast<std::size_t>(s) * A + a] * out.reach_action_[out.cube(d, s, a, y)];
        out.reach_[out.square(d, s, y)] = total;
        if (total <= 0.0) continue;
        for (int a = 0; a < A; ++a)
          out.h_[out.square(d, s, y) * A + a] =
              out.pi_[static_cast<std::size_t>(s) * A + a] * out.reach_action_[out.cube(d, s, a, y)] / total;
      }
    }
  }
  return out;
}

}  // namespace hca
