#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "hca/reference.hpp"

namespace hca {

ValueTable evaluate_policy_serial(const TabularMdp& mdp, const PolicyTable& policy,
                                  const PolicyEvaluationOptions& options) {
  policy.check_matches(mdp);
  if (!(options.tol > 0.0)) throw ConfigError("evaluate_policy: tol must be positive");
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  const auto pi = policy.probability_table();
  std::vector<double> v(static_cast<std::size_t>(S), 0.0), next(v.size(), 0.0);
  double delta = std::numeric_limits<double>::infinity();
  for (int it = 0; it < options.max_iterations; ++it) {
    delta = 0.0;
    for (int s = 0; s < S; ++s) {
      double acc = 0.0;
      if (!mdp.is_terminal(s)) {
        for (int a = 0; a < A; ++a) {
          double q = 0.0;
          for (int y = 0; y < S; ++y) {
            const double p = mdp.p(s, a, y);
            if (p == 0.0) continue;
            q += p * (mdp.r(s, a, y) + (mdp.is_terminal(y) ? 0.0 : mdp.gamma() * v[y]));
          }
          acc += pi[static_cast<std::size_t>(s) * A + a] * q;
        }
      }
      next[s] = acc;
      delta = std::max(delta, std::abs(next[s] - v[s]));
    }
    v.swap(next);
    if (delta < options.tol) return ValueTable(std::move(v));
  }
  throw NumericalError("evaluate_policy did not converge; last sweep change " + std::to_string(delta),
                       delta);
}

}  // namespace hca
