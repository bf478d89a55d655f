#include <doctest.h>

#include <cmath>

#include "hca/envs.hpp"
#include "hca/mdp.hpp"
#include "hca/reference.hpp"
#include "support.hpp"

using namespace hca;

namespace {

TabularMdp two_state(double gamma) {
  // 0 --(any)--> {0 w.p. 0.5, 1 w.p. 0.5}, 1 terminal, reward 1 on reaching 1.
  std::vector<double> P = {0.5, 0.5, 0.5, 0.5, 0, 1, 0, 1};
  std::vector<double> R = {0, 1, 0, 1, 0, 0, 0, 0};
  return TabularMdp(2, 2, gamma, RewardKind::NextStateOnly, P, R, {false, true}, {1.0, 0.0});
}

}  // namespace

TEST_CASE("mdp constructor rejects malformed tables") {
  std::vector<double> P = {0.5, 0.5, 0.5, 0.5, 0, 1, 0, 1};
  std::vector<double> R(8, 0.0);
  CHECK_THROWS_AS(TabularMdp(2, 2, 0.0, RewardKind::NextStateOnly, P, R, {false, true}, {1, 0}),
                  ConfigError);
  CHECK_THROWS_AS(TabularMdp(2, 2, 1.5, RewardKind::NextStateOnly, P, R, {false, true}, {1, 0}),
                  ConfigError);
  auto bad = P;
  bad[0] = 0.7;
  CHECK_THROWS_AS(TabularMdp(2, 2, 0.9, RewardKind::NextStateOnly, bad, R, {false, true}, {1, 0}),
                  ConfigError);
  CHECK_THROWS_AS(TabularMdp(2, 2, 0.9, RewardKind::NextStateOnly, P, R, {false, true}, {0.6, 0}),
                  ConfigError);
  CHECK_THROWS_AS(TabularMdp(2, 2, 0.9, RewardKind::NextStateOnly, {P.begin(), P.end() - 1}, R,
                             {false, true}, {1, 0}),
                  ConfigError);
  // terminal must self-absorb
  auto leak = P;
  leak[4] = 1;
  leak[5] = 0;
  CHECK_THROWS_AS(TabularMdp(2, 2, 0.9, RewardKind::NextStateOnly, leak, R, {false, true}, {1, 0}),
                  ConfigError);
  // next-state-only rewards may not depend on the action
  auto r2 = R;
  r2[1] = 1.0;
  CHECK_THROWS_AS(TabularMdp(2, 2, 0.9, RewardKind::NextStateOnly, P, r2, {false, true}, {1, 0}),
                  ConfigError);
  CHECK_NOTHROW(TabularMdp(2, 2, 0.9, RewardKind::FullTransition, P, r2, {false, true}, {1, 0}));
  CHECK_THROWS_AS(reward_kind_from_string("sideways"), ConfigError);
}

TEST_CASE("policy softmax is stable and normalised") {
  PolicyTable p(1, 3, {1000.0, 1000.0, -1000.0});
  const auto pr = p.probs(0);
  CHECK(pr[0] == doctest::Approx(0.5));
  CHECK(pr[1] == doctest::Approx(0.5));
  CHECK(pr[2] == 0.0);
  CHECK_THROWS_AS(PolicyTable(2, 2, {0.0, 1.0, 2.0}), ConfigError);
  CHECK_THROWS_AS(PolicyTable(2, 3).check_matches(make_two_arm()), ConfigError);
}

TEST_CASE("value of a geometric hitting time matches the closed form") {
  const double g = 0.9;
  const TabularMdp mdp = two_state(g);
  const PolicyTable pi = PolicyTable::uniform(mdp);
  // V = 0.5 (1) + 0.5 g V  =>  V = 0.5 / (1 − 0.5 g)
  const double expect = 0.5 / (1.0 - 0.5 * g);
  CHECK(solve_policy_values(mdp, pi)[0] == doctest::Approx(expect).epsilon(1e-14));
  CHECK(evaluate_policy(mdp, pi, 1e-13)[0] == doctest::Approx(expect).epsilon(1e-12));
  CHECK(evaluate_policy_serial(mdp, pi)[0] == doctest::Approx(expect).epsilon(1e-12));
  CHECK(bellman_residual(mdp, pi, solve_policy_values(mdp, pi)) < 1e-14);
}

TEST_CASE("iterative evaluation, serial evaluation and linear solve agree on random MDPs") {
  Rng rng(11);
  for (int i = 0; i < 5; ++i) {
    RandomMdpConfig cfg;
    cfg.n_states = 6 + i;
    cfg.reward_kind = RewardKind::FullTransition;
    const TabularMdp mdp = make_random_mdp(cfg, rng);
    const PolicyTable pi = test::random_policy(mdp, rng);
    const ValueTable a = solve_policy_values(mdp, pi);
    const ValueTable b = evaluate_policy(mdp, pi, 1e-13);
    const ValueTable c = evaluate_policy_serial(mdp, pi, {1e-13, 1'000'000});
    for (int s = 0; s < mdp.n_states(); ++s) {
      CHECK(std::abs(a[s] - b[s]) < 1e-10);
      CHECK(std::abs(b[s] - c[s]) < 1e-12);
    }
  }
}

TEST_CASE("evaluation reports non-termination") {
  // A rewarded self loop on a live state never ends with gamma 1.
  const TabularMdp loop(2, 1, 1.0, RewardKind::NextStateOnly, {1, 0, 0, 1}, {1, 0, 0, 0},
                        {false, true}, {1, 0});
  const PolicyTable pi = PolicyTable::uniform(loop);
  CHECK_THROWS_AS(solve_policy_values(loop, pi), NumericalError);
  CHECK_THROWS_AS(evaluate_policy(loop, pi, PolicyEvaluationOptions{1e-12, 50}), NumericalError);
}

TEST_CASE("exact gradient on TwoArm matches the closed form") {
  const TabularMdp mdp = make_two_arm(1.0);
  PolicyTable pi(mdp.n_states(), 2);
  pi.logit(0, 1) = 0.4;
  const auto pr = pi.probs(0);
  const ExactGradient g = exact_policy_gradient(mdp, pi);
  // J = π1, dJ/dθ_b = π1 ([b = 1] − π_b)
  CHECK(g.estimate.at(0, 0) == doctest::Approx(-pr[1] * pr[0]).epsilon(1e-14));
  CHECK(g.estimate.at(0, 1) == doctest::Approx(pr[1] * (1 - pr[1])).epsilon(1e-14));
  CHECK(g.within_tolerance);
}

TEST_CASE("exact gradient matches finite differences") {
  Rng rng(5);
  for (auto kind : {RewardKind::NextStateOnly, RewardKind::FullTransition}) {
    RandomMdpConfig cfg;
    cfg.n_states = 7;
    cfg.n_actions = 3;
    cfg.reward_kind = kind;
    const TabularMdp mdp = make_random_mdp(cfg, rng);
    const PolicyTable pi = test::random_policy(mdp, rng);
    const ExactGradient g = exact_policy_gradient(mdp, pi);
    const auto fd = test::finite_difference_gradient(mdp, pi);
    for (std::size_t i = 0; i < fd.size(); ++i) CHECK(std::abs(g.estimate.grad[i] - fd[i]) < 1e-7);
  }
  FrozenLakeConfig fl;
  fl.gamma = 0.95;
  const TabularMdp lake = make_frozenlake(fl);
  const PolicyTable pi = test::random_policy(lake, rng, 0.5);
  const auto fd = test::finite_difference_gradient(lake, pi);
  const ExactGradient g = exact_policy_gradient(lake, pi);
  for (std::size_t i = 0; i < fd.size(); ++i) CHECK(std::abs(g.estimate.grad[i] - fd[i]) < 1e-7);
}

TEST_CASE("discounted visitation sums to the expected discounted episode length") {
  const double g = 0.9;
  const TabularMdp mdp = two_state(g);
  const auto d = discounted_visitation(mdp, PolicyTable::uniform(mdp), 2000);
  // Σ_t (0.5 g)^t
  CHECK(d[0] == doctest::Approx(1.0 / (1.0 - 0.5 * g)).epsilon(1e-12));
  CHECK(d[1] == 0.0);
}

TEST_CASE("shaping keeps greedy actions and shifts values by the potential") {
  Rng rng(2);
  RandomMdpConfig cfg;
  cfg.n_states = 8;
  cfg.reward_kind = RewardKind::FullTransition;
  const TabularMdp mdp = make_random_mdp(cfg, rng);
  ValueTable phi = test::random_values(mdp.n_states(), rng);
  for (int s = 0; s < mdp.n_states(); ++s)
    if (mdp.is_terminal(s)) phi[s] = 0.0;
  const TabularMdp shaped = shape_rewards(mdp, phi);
  const PolicyTable pi = test::random_policy(mdp, rng);
  const ValueTable v = solve_policy_values(mdp, pi);
  const ValueTable vs = solve_policy_values(shaped, pi);
  for (int s = 0; s < mdp.n_states(); ++s) CHECK(vs[s] == doctest::Approx(v[s] - phi[s]).epsilon(1e-10));
  const auto vi = value_iteration(mdp);
  const auto vis = value_iteration(shaped);
  for (int s = 0; s < mdp.n_states(); ++s)
    if (!mdp.is_terminal(s))
      CHECK(greedy_actions(vi, mdp.n_actions(), s) == greedy_actions(vis, mdp.n_actions(), s));

  ValueTable bad = phi;
  for (int s = 0; s < mdp.n_states(); ++s)
    if (mdp.is_terminal(s)) bad[s] = 1.0;
  CHECK_THROWS_AS(shape_rewards(mdp, bad), ConfigError);
}

TEST_CASE("sampled trajectories chain and stop at terminals") {
  Rng rng(3);
  FrozenLakeConfig fl;
  const TabularMdp mdp = make_frozenlake(fl);
  const PolicyTable pi = PolicyTable::uniform(mdp);
  for (int e = 0; e < 200; ++e) {
    const Trajectory t = sample_trajectory(mdp, pi, rng, 30);
    CHECK_NOTHROW(t.validate());
    CHECK(t.size() <= 30u);
    CHECK(t.truncated != t.steps.back().terminal);
  }
  CHECK_THROWS_AS(sample_trajectory(mdp, pi, rng, 0), ConfigError);

  Trajectory broken;
  broken.steps = {{0, 0, 0.0, 1, false}, {2, 0, 0.0, 3, true}};
  CHECK_THROWS_AS(broken.validate(), ConfigError);
}

TEST_CASE("discounted return of a hand-built trajectory") {
  Trajectory t;
  t.steps = {{0, 0, 1.0, 1, false}, {1, 0, 2.0, 2, false}, {2, 0, 4.0, 3, true}};
  CHECK(discounted_return(t, 0, 0.5) == doctest::Approx(1.0 + 1.0 + 1.0));
  CHECK(discounted_return(t, 2, 0.5) == doctest::Approx(4.0));
  CHECK(t.total_reward() == doctest::Approx(7.0));
  CHECK_THROWS_AS(discounted_return(t, 4, 0.5), std::out_of_range);
}

TEST_CASE("update estimate arithmetic") {
  UpdateEstimate a(2, 2), b(2, 2), c(3, 2);
  a.at(0, 1) = 3.0;
  b.at(1, 0) = 4.0;
  a += b;
  CHECK(a.norm() == doctest::Approx(5.0));
  a *= 2.0;
  CHECK(a.at(1, 0) == 8.0);
  CHECK(max_abs_diff(a, b) == doctest::Approx(6.0));
  CHECK_THROWS_AS(a += c, ConfigError);
  CHECK_THROWS_AS(max_abs_diff(a, c), ConfigError);
}
