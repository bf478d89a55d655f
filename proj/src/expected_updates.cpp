#include "hca/expected_updates.hpp"

#include <vector>

namespace hca {

namespace {

double transformed_reward(const TabularMdp& mdp, const ValueTable* value, int x, int b, int y) {
  const double r = mdp.r(x, b, y);
  if (value == nullptr) return r;
  return (mdp.is_terminal(y) ? 0.0 : mdp.gamma() * (*value)[y]) + r - (*value)[x];
}

UpdateEstimate finish(const TabularMdp& mdp, const PolicyTable& policy,
                      const std::vector<double>& credited) {
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  const auto d = discounted_visitation(mdp, policy, default_gradient_horizon(mdp, 1e-14, 1'000'000));
  const auto pi = policy.probability_table();
  UpdateEstimate out(S, A);
  for (int s = 0; s < S; ++s) {
    if (mdp.is_terminal(s)) continue;
    const double* e = credited.data() + static_cast<std::size_t>(s) * A;
    const double* p = pi.data() + static_cast<std::size_t>(s) * A;
    double total = 0.0;
    for (int a = 0; a < A; ++a) total += e[a];
    for (int b = 0; b < A; ++b) out.at(s, b) = d[s] * (e[b] - p[b] * total);
    out.weight[s] = d[s];
  }
  return out;
}

UpdateEstimate state_credit_update(const TabularMdp& mdp, const PolicyTable& policy,
                                   const ValueTable* value, const ExactHindsight& oracle) {
  policy.check_matches(mdp);
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  const int D = oracle.delta_max();
  const auto pi = policy.probability_table();
  // E[s][a] = Σ_Δ γ^{Δ−1} Σ_y h_Δ(a|s,y) w_Δ(y|s)
  std::vector<double> credited(static_cast<std::size_t>(S) * A, 0.0);

#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < S; ++s) {
    if (mdp.is_terminal(s)) continue;
    std::vector<double> w(static_cast<std::size_t>(S));
    double* e = credited.data() + static_cast<std::size_t>(s) * A;
    double discount = 1.0;
    for (int delta = 1; delta <= D; ++delta, discount *= mdp.gamma()) {
      std::fill(w.begin(), w.end(), 0.0);
      for (int x = 0; x < S; ++x) {
        if (mdp.is_terminal(x)) continue;
        const double m = delta == 1 ? (x == s ? 1.0 : 0.0) : oracle.reach(delta - 1, s, x);
        if (m == 0.0) continue;
        for (int b = 0; b < A; ++b) {
          const double mb = m * pi[static_cast<std::size_t>(x) * A + b];
          const auto row = mdp.transition_row(x, b);
          for (int y = 0; y < S; ++y)
            if (row[y] != 0.0) w[y] += mb * row[y] * transformed_reward(mdp, value, x, b, y);
        }
      }
      for (int y = 0; y < S; ++y) {
        if (w[y] == 0.0) continue;
        const auto h = oracle.probs(delta, s, y);
        for (int a = 0; a < A; ++a) e[a] += discount * h[a] * w[y];
      }
    }
  }
  return finish(mdp, policy, credited);
}

}  // namespace

UpdateEstimate expected_next_state_credit_update(const TabularMdp& mdp, const PolicyTable& policy,
                                                 const ExactHindsight& oracle) {
  return state_credit_update(mdp, policy, nullptr, oracle);
}

UpdateEstimate expected_state_credit_value_update(const TabularMdp& mdp, const PolicyTable& policy,
                                                  const ValueTable& value,
                                                  const ExactHindsight& oracle) {
  return state_credit_update(mdp, policy, &value, oracle);
}

UpdateEstimate expected_transition_credit_update(const TabularMdp& mdp, const PolicyTable& policy,
                                                 const TransitionHindsight& oracle,
                                                 const ValueTable* value) {
  policy.check_matches(mdp);
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  const int D = oracle.delta_max();
  std::vector<double> credited(static_cast<std::size_t>(S) * A, 0.0);

#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < S; ++s) {
    if (mdp.is_terminal(s)) continue;
    std::vector<double> h(static_cast<std::size_t>(A));
    double* e = credited.data() + static_cast<std::size_t>(s) * A;
    double discount = 1.0;
    for (int delta = 0; delta <= D; ++delta, discount *= mdp.gamma()) {
      for (int x = 0; x < S; ++x) {
        if (mdp.is_terminal(x)) continue;
        for (int b = 0; b < A; ++b) {
          for (int y = 0; y < S; ++y) {
            const double j = oracle.joint(delta, s, x, b, y);
            if (j == 0.0) continue;
            const double r = transformed_reward(mdp, value, x, b, y);
            if (r == 0.0) continue;
            oracle.probs(delta, s, x, b, y, h);
            for (int a = 0; a < A; ++a) e[a] += discount * j * h[a] * r;
          }
        }
      }
    }
  }
  return finish(mdp, policy, credited);
}

}  // namespace hca
