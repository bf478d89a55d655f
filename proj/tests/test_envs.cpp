#include <doctest.h>

#include <cmath>

#include "hca/envs.hpp"
#include "support.hpp"

using namespace hca;

TEST_CASE("frozen lake slip rule and rewards") {
  FrozenLakeConfig cfg;
  const TabularMdp m = make_frozenlake(cfg);
  REQUIRE(m.n_states() == 16);
  REQUIRE(m.n_actions() == 4);
  // from the start corner, "right" slips up (wall, stay) or down
  CHECK(m.p(0, kRight, 1) == doctest::Approx(1.0 / 3));
  CHECK(m.p(0, kRight, 4) == doctest::Approx(1.0 / 3));
  CHECK(m.p(0, kRight, 0) == doctest::Approx(1.0 / 3));
  // "left" from the start: left and up hit walls
  CHECK(m.p(0, kLeft, 0) == doctest::Approx(2.0 / 3));
  for (int s : {5, 7, 11, 12, 15}) CHECK(m.is_terminal(s));
  CHECK(m.r(14, kRight, 15) == 1.0);
  CHECK(m.r(4, kRight, 5) == 0.0);
  CHECK(m.initial_dist()[0] == 1.0);
  for (int s = 0; s < 16; ++s)
    for (int a = 0; a < 4; ++a) {
      double total = 0.0;
      for (double p : m.transition_row(s, a)) total += p;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
    }

  cfg.hole_penalty = -1.0;
  const TabularMdp pen = make_frozenlake(cfg);
  CHECK(pen.r(4, kRight, 5) == -1.0);
  CHECK(pen.r(14, kRight, 15) == 1.0);

  cfg.slippery = false;
  const TabularMdp det = make_frozenlake(cfg);
  CHECK(det.p(0, kRight, 1) == 1.0);
  CHECK(det.p(0, kUp, 0) == 1.0);
}

TEST_CASE("frozen lake maps are validated") {
  CHECK(parse_lake_map("SF/FG") == std::vector<std::string>{"SF", "FG"});
  CHECK(parse_lake_map("SF,FG") == std::vector<std::string>{"SF", "FG"});
  FrozenLakeConfig cfg;
  cfg.map = {"SF", "F"};
  CHECK_THROWS_AS(make_frozenlake(cfg), ConfigError);
  cfg.map = {"SX", "FG"};
  CHECK_THROWS_AS(make_frozenlake(cfg), ConfigError);
  cfg.map = {"FF", "FG"};
  CHECK_THROWS_AS(make_frozenlake(cfg), ConfigError);
  cfg.map = {"SF", "FF"};
  CHECK_THROWS_AS(make_frozenlake(cfg), ConfigError);
}

TEST_CASE("optimal frozen lake value from the start is about 0.82 as gamma approaches 1") {
  FrozenLakeConfig cfg;
  cfg.gamma = 1.0 - 1e-10;
  const auto vi = value_iteration(make_frozenlake(cfg), 1e-13);
  CHECK(vi.values[0] == doctest::Approx(0.8235).epsilon(1e-3));
}

TEST_CASE("delayed chain layout and payoff") {
  const DelayedChainConfig cfg{3, 2, 3, 1.0};
  const TabularMdp m = make_delayed_chain(cfg);
  const auto L = delayed_chain_layout(cfg);
  CHECK(m.n_states() == 3 * L.stage_size);
  CHECK(m.p(L.decision(0), kRewardedAction, L.good_filler(0, 0)) == 1.0);
  CHECK(m.p(L.decision(0), 0, L.bad_filler(0, 0)) == 1.0);
  CHECK(m.p(L.decision(0), 2, L.bad_filler(0, 0)) == 1.0);
  CHECK(m.p(L.good_filler(0, 1), 0, L.good_outcome(0)) == 1.0);
  CHECK(m.p(L.good_outcome(0), 1, L.decision(1)) == 1.0);
  CHECK(m.is_terminal(L.good_outcome(2)));
  CHECK(m.is_terminal(L.bad_outcome(2)));
  CHECK(!m.is_terminal(L.good_outcome(1)));

  // always choosing the rewarded action collects one per stage
  PolicyTable good(m.n_states(), m.n_actions());
  for (int s = 0; s < m.n_states(); ++s) good.logit(s, kRewardedAction) = 50.0;
  CHECK(solve_policy_values(m, good)[0] == doctest::Approx(3.0).epsilon(1e-12));
  // under the uniform policy each stage pays 1/3
  CHECK(solve_policy_values(m, PolicyTable::uniform(m))[0] == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(make_delayed_chain({0, 1, 2, 1.0}), ConfigError);
  CHECK_THROWS_AS(make_delayed_chain({1, -1, 2, 1.0}), ConfigError);
  CHECK_THROWS_AS(make_delayed_chain({1, 1, 1, 1.0}), ConfigError);
}

TEST_CASE("two arm and chain environments") {
  const TabularMdp two = make_two_arm(1.0);
  CHECK(two.n_states() == 3);
  CHECK(solve_policy_values(two, PolicyTable::uniform(two))[0] == doctest::Approx(0.5));

  const TabularMdp c3 = make_chain3(0.9);
  CHECK(solve_policy_values(c3, PolicyTable::uniform(c3))[0] == doctest::Approx(0.9));

  const TabularMdp c = make_chain(5, 3, -1.0, -1.0, 0.5);
  CHECK(solve_policy_values(c, PolicyTable::uniform(c))[0] == doctest::Approx(-(1 + 0.5 + 0.25 + 0.125)));
  CHECK_THROWS_AS(make_chain(1, 2, 0, 0, 0.9), ConfigError);
}

TEST_CASE("random MDPs respect their configuration") {
  Rng rng(9);
  for (auto kind : {RewardKind::NextStateOnly, RewardKind::FullTransition}) {
    RandomMdpConfig cfg;
    cfg.n_states = 12;
    cfg.n_actions = 4;
    cfg.n_terminal = 2;
    cfg.reward_kind = kind;
    cfg.max_successors = 3;
    const TabularMdp m = make_random_mdp(cfg, rng);
    CHECK(m.reward_kind() == kind);
    int terminals = 0;
    for (int s = 0; s < 12; ++s) {
      terminals += m.is_terminal(s);
      if (m.is_terminal(s)) continue;
      for (int a = 0; a < 4; ++a) {
        int nz = 0;
        for (double p : m.transition_row(s, a)) nz += p > 0.0;
        CHECK(nz <= 3);
      }
    }
    CHECK(terminals == 2);
    // episodes end with probability one
    CHECK_NOTHROW(solve_policy_values(m.with_gamma(1.0), PolicyTable::uniform(m)));
  }
  RandomMdpConfig bad;
  bad.n_terminal = bad.n_states;
  CHECK_THROWS_AS(make_random_mdp(bad, rng), ConfigError);
}
