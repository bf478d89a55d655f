#include <doctest.h>

#include <cmath>
#include <functional>

#include "hca/envs.hpp"
#include "hca/hindsight.hpp"
#include "hca/reference.hpp"
#include "support.hpp"

using namespace hca;

namespace {

// P(A_0 = a, S_Δ = x | S_0 = s) by walking every path of length Δ. A path
// that enters a terminal state before step Δ has no position Δ.
double path_mass(const TabularMdp& m, const PolicyTable& pi, int s, int a, int delta, int x) {
  std::function<double(int, int)> walk = [&](int state, int remaining) -> double {
    if (remaining == 0) return state == x ? 1.0 : 0.0;
    if (m.is_terminal(state)) return 0.0;
    const auto pr = pi.probs(state);
    double total = 0.0;
    for (int b = 0; b < m.n_actions(); ++b)
      for (int y = 0; y < m.n_states(); ++y)
        if (m.p(state, b, y) > 0.0) total += pr[b] * m.p(state, b, y) * walk(y, remaining - 1);
    return total;
  };
  double total = 0.0;
  for (int y = 0; y < m.n_states(); ++y)
    if (m.p(s, a, y) > 0.0) total += pi.probs(s)[a] * m.p(s, a, y) * walk(y, delta - 1);
  return total;
}

TabularMdp small_mdp(Rng& rng, RewardKind kind) {
  RandomMdpConfig cfg;
  cfg.n_states = 5;
  cfg.n_actions = 3;
  cfg.reward_kind = kind;
  cfg.max_successors = 3;
  return make_random_mdp(cfg, rng);
}

}  // namespace

TEST_CASE("exact hindsight matches brute-force path enumeration") {
  Rng rng(21);
  const TabularMdp m = small_mdp(rng, RewardKind::NextStateOnly);
  const PolicyTable pi = test::random_policy(m, rng);
  const int D = 4;
  const ExactHindsight h = exact_hindsight(m, pi, D);
  for (int d = 1; d <= D; ++d)
    for (int s = 0; s < m.n_states(); ++s) {
      if (m.is_terminal(s)) continue;
      for (int x = 0; x < m.n_states(); ++x) {
        double joint[3], reach = 0.0;
        for (int a = 0; a < 3; ++a) reach += joint[a] = path_mass(m, pi, s, a, d, x);
        CHECK(h.reach(d, s, x) == doctest::Approx(reach).epsilon(1e-13));
        if (reach == 0.0) {
          CHECK_THROWS_AS(h.probs(d, s, x), UnreachablePairError);
          continue;
        }
        for (int a = 0; a < 3; ++a) CHECK(std::abs(h.prob(d, s, x, a) - joint[a] / reach) < 1e-13);
      }
    }
  CHECK_THROWS_AS(h.probs(D + 1, 0, 0), std::out_of_range);
  CHECK_THROWS_AS(exact_hindsight(m, pi, 0), ConfigError);
}

TEST_CASE("hindsight averages back to the policy") {
  // Σ_x P(S_Δ = x | s) h_Δ(a | s, x) = π(a | s) − P(episode over before Δ, a)
  // On a chain that cannot end early the identity is exact.
  Rng rng(4);
  RandomMdpConfig cfg;
  cfg.n_states = 6;
  cfg.n_terminal = 0;
  cfg.n_actions = 2;
  cfg.gamma = 0.9;
  const TabularMdp m = make_random_mdp(cfg, rng);
  const PolicyTable pi = test::random_policy(m, rng);
  const ExactHindsight h = exact_hindsight(m, pi, 6);
  for (int d = 1; d <= 6; ++d)
    for (int s = 0; s < 6; ++s)
      for (int a = 0; a < 2; ++a) {
        double mix = 0.0;
        for (int x = 0; x < 6; ++x)
          if (h.defined(d, s, x)) mix += h.reach(d, s, x) * h.prob(d, s, x, a);
        CHECK(mix == doctest::Approx(pi.probs(s)[a]).epsilon(1e-13));
      }
}

TEST_CASE("parallel and serial hindsight agree") {
  Rng rng(8);
  FrozenLakeConfig fl;
  const TabularMdp m = make_frozenlake(fl);
  const PolicyTable pi = test::random_policy(m, rng);
  const ExactHindsight a = exact_hindsight(m, pi, 12);
  const ExactHindsight b = exact_hindsight_serial(m, pi, 12);
  double worst = 0.0;
  for (int d = 1; d <= 12; ++d)
    for (int s = 0; s < 16; ++s)
      for (int x = 0; x < 16; ++x) {
        worst = std::max(worst, std::abs(a.reach(d, s, x) - b.reach(d, s, x)));
        if (!a.defined(d, s, x)) continue;
        for (int act = 0; act < 4; ++act)
          worst = std::max(worst, std::abs(a.prob(d, s, x, act) - b.prob(d, s, x, act)));
      }
  CHECK(worst < 1e-13);
}

TEST_CASE("transition hindsight matches brute force") {
  Rng rng(33);
  const TabularMdp m = small_mdp(rng, RewardKind::FullTransition);
  const PolicyTable pi = test::random_policy(m, rng);
  const int D = 3;
  const TransitionHindsight th = exact_transition_hindsight(m, pi, D);
  const int S = m.n_states(), A = m.n_actions();
  for (int s = 0; s < S; ++s) {
    if (m.is_terminal(s)) continue;
    // offset 0: the transition is (s, a_t, y) itself, so the row is an indicator
    for (int b = 0; b < A; ++b)
      for (int y = 0; y < S; ++y) {
        if (m.p(s, b, y) == 0.0) continue;
        const auto row = th.probs(0, s, s, b, y);
        for (int a = 0; a < A; ++a) CHECK(row[a] == (a == b ? 1.0 : 0.0));
      }
    for (int d = 1; d <= D; ++d)
      for (int x = 0; x < S; ++x) {
        if (m.is_terminal(x)) continue;
        for (int b = 0; b < A; ++b)
          for (int y = 0; y < S; ++y) {
            double joint[3], total = 0.0;
            for (int a = 0; a < A; ++a)
              total += joint[a] = path_mass(m, pi, s, a, d, x) * pi.probs(x)[b] * m.p(x, b, y);
            CHECK(th.joint(d, s, x, b, y) == doctest::Approx(total).epsilon(1e-13));
            if (total == 0.0) {
              CHECK_THROWS_AS(th.probs(d, s, x, b, y), UnreachablePairError);
              continue;
            }
            const auto row = th.probs(d, s, x, b, y);
            for (int a = 0; a < A; ++a) CHECK(std::abs(row[a] - joint[a] / total) < 1e-13);
          }
      }
  }
  CHECK_THROWS_AS(exact_transition_hindsight(m, pi, -1), ConfigError);
}

TEST_CASE("hindsight horizon covers the discounted mass") {
  const TabularMdp c = make_chain(5, 2, 0.0, 1.0, 0.9);
  const PolicyTable pi = PolicyTable::uniform(c);
  CHECK(hindsight_horizon(c, pi) >= 4);
  CHECK(hindsight_horizon(c, pi) <= 5);
}
