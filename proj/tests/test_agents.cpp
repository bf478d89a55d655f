#include <doctest.h>

#include <cmath>

#include "hca/agents.hpp"
#include "hca/envs.hpp"
#include "support.hpp"

using namespace hca;

namespace {

// 0 -> 1 -> 2 -> 3 -> 4(terminal) with rewards 1, 2, 3, 4 and actions 0, 1, 0, 1.
Trajectory corridor() {
  Trajectory t;
  t.steps = {{0, 0, 1.0, 1, false}, {1, 1, 2.0, 2, false}, {2, 0, 3.0, 3, false}, {3, 1, 4.0, 4, true}};
  return t;
}

double score(const PolicyTable& pi, int s, int a, int b) {
  return (a == b ? 1.0 : 0.0) - pi.probs(s)[b];
}

}  // namespace

TEST_CASE("episodes split into segments that keep their start time") {
  const RolloutBatch b = split_into_segments(corridor(), 3);
  REQUIRE(b.segments.size() == 2);
  CHECK(b.segments[0].size() == 3);
  CHECK(b.segments[0].truncated);
  CHECK(bootstrap_state(b.segments[0]) == 3);
  CHECK(b.segments[1].start_time == 3);
  CHECK(!bootstrap_state(b.segments[1]).has_value());
  CHECK(b.total_steps() == 4);
  CHECK_THROWS_AS(split_into_segments(corridor(), 0), ConfigError);
}

TEST_CASE("reinforce on a hand-built episode") {
  Rng rng(1);
  const PolicyTable pi = test::random_policy(5, 2, rng);
  const double g = 0.5;
  const UpdateEstimate u = reinforce_update(RolloutBatch{{corridor()}}, pi, g);
  const double r[4] = {1, 2, 3, 4};
  const int acts[4] = {0, 1, 0, 1};
  for (int t = 0; t < 4; ++t) {
    double G = 0.0;
    for (int k = 3; k >= t; --k) G = r[k] + g * G;
    for (int b = 0; b < 2; ++b)
      CHECK(u.at(t, b) == doctest::Approx(std::pow(g, t) * score(pi, t, acts[t], b) * G).epsilon(1e-14));
  }
  CHECK_THROWS_AS(reinforce_update(RolloutBatch{}, pi, g), ConfigError);
}

TEST_CASE("a2c bootstraps truncated segments from V") {
  Rng rng(2);
  const PolicyTable pi = test::random_policy(5, 2, rng);
  const ValueTable v = test::random_values(5, rng);
  const double g = 0.8;
  const RolloutBatch b = split_into_segments(corridor(), 2);
  const UpdateEstimate u = a2c_update(b, pi, v, g);
  // first segment covers t = 0, 1 and bootstraps from state 2
  const double adv0 = 1 + g * 2 + g * g * v[2] - v[0];
  const double adv1 = 2 + g * v[2] - v[1];
  // second segment ends at the terminal
  const double adv2 = 3 + g * 4 - v[2];
  const double adv3 = 4 - v[3];
  const double adv[4] = {adv0, adv1, adv2, adv3};
  const int acts[4] = {0, 1, 0, 1};
  for (int t = 0; t < 4; ++t)
    for (int b2 = 0; b2 < 2; ++b2)
      CHECK(u.at(t, b2) == doctest::Approx(std::pow(g, t) * score(pi, t, acts[t], b2) * adv[t]).epsilon(1e-13));

  // one-step advantages
  const UpdateEstimate n1 = n_step_a2c_update(b, pi, v, g, 1);
  CHECK(n1.at(0, 0) == doctest::Approx(score(pi, 0, 0, 0) * (1 + g * v[1] - v[0])).epsilon(1e-13));
  CHECK(n1.at(3, 1) == doctest::Approx(std::pow(g, 3) * score(pi, 3, 1, 1) * (4 - v[3])).epsilon(1e-13));
  CHECK_THROWS_AS(n_step_a2c_update(b, pi, v, g, 0), ConfigError);
}

TEST_CASE("augmented rewards telescope and drop V at terminals") {
  ValueTable v(std::vector<double>{1.0, 2.0, 5.0});
  CHECK(augmented_reward(v, 0, 0.5, 1, 0.9, false) == doctest::Approx(0.9 * 2.0 + 0.5 - 1.0));
  CHECK(augmented_reward(v, 0, 0.5, 2, 0.9, true) == doctest::Approx(0.5 - 1.0));
}

TEST_CASE("state hca with a constant credit and exact reward model") {
  // With C(a | ·) = π(a | s) every future term has zero score mean, so only the
  // immediate r̂ term survives.
  Rng rng(3);
  const TabularMdp mdp = make_chain(5, 2, 1.0, 1.0, 0.9);
  const PolicyTable pi = test::random_policy(mdp, rng);
  FixedCredit prior{2, pi.probability_table()};
  RewardModel rhat(5, 2);
  for (int s = 0; s < 5; ++s) {
    rhat(s, 0) = s;
    rhat(s, 1) = -s;
  }
  const RolloutBatch b = test::sample_episodes(mdp, pi, rng, 1);
  const UpdateEstimate u = hca_update(b, pi, prior, rhat, nullptr, 0.9);
  for (int s = 0; s < 4; ++s) {
    const auto p = pi.probs(s);
    const double mean = p[0] * rhat(s, 0) + p[1] * rhat(s, 1);
    for (int a = 0; a < 2; ++a)
      CHECK(u.at(s, a) == doctest::Approx(std::pow(0.9, s) * p[a] * (rhat(s, a) - mean)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(hca_update(b, pi, prior, RewardModel(3, 2), nullptr, 0.9), ConfigError);
}

TEST_CASE("entropy bonus matches finite differences of the entropy") {
  Rng rng(4);
  PolicyTable pi = test::random_policy(3, 4, rng);
  RolloutBatch b;
  Trajectory t;
  t.steps = {{1, 0, 0.0, 1, false}};
  b.segments.push_back(t);
  UpdateEstimate u(3, 4);
  add_entropy_bonus(u, b, pi, 0.7);
  auto entropy = [&] {
    double h = 0.0;
    for (double p : pi.probs(1)) h -= p * std::log(p);
    return h;
  };
  for (int a = 0; a < 4; ++a) {
    const double keep = pi.logit(1, a);
    pi.logit(1, a) = keep + 1e-6;
    const double up = entropy();
    pi.logit(1, a) = keep - 1e-6;
    const double down = entropy();
    pi.logit(1, a) = keep;
    CHECK(u.at(1, a) == doctest::Approx(0.7 * (up - down) / 2e-6).epsilon(1e-7));
  }
}

TEST_CASE("value and reward learners move toward their targets") {
  ValueTable v(5);
  const RolloutBatch b = split_into_segments(corridor(), 2);
  train_value(v, b, 0.5, 1.0);
  // targets: segment one bootstraps from V(2) = 0
  CHECK(v[0] == doctest::Approx(1 + 0.5 * 2));
  CHECK(v[1] == doctest::Approx(2));
  CHECK(v[2] == doctest::Approx(3 + 0.5 * 4));
  CHECK(v[3] == doctest::Approx(4));
  CHECK_THROWS_AS(train_value(v, b, 0.5, 0.0), ConfigError);

  RewardModel r(5, 2);
  const double mse = train_reward_model(r, b, 0.5);
  CHECK(mse == doctest::Approx((1 + 4 + 9 + 16) / 4.0));
  CHECK(r(2, 0) == doctest::Approx(1.5));
  CHECK(r(2, 1) == 0.0);
}

TEST_CASE("apply_update clips the global norm") {
  PolicyTable pi(2, 2);
  UpdateEstimate u(2, 2);
  u.at(0, 0) = 3.0;
  u.at(1, 1) = 4.0;
  apply_update(pi, u, 2.0, 0.5);
  CHECK(pi.logit(0, 0) == doctest::Approx(2.0 * 0.5 * 3.0 / 5.0));
  CHECK(pi.logit(1, 1) == doctest::Approx(2.0 * 0.5 * 4.0 / 5.0));
  PolicyTable free(2, 2);
  apply_update(free, u, 1.0, 0.0);
  CHECK(free.logit(1, 1) == 4.0);
  CHECK_THROWS_AS(apply_update(pi, UpdateEstimate(3, 2), 1.0, 0.0), ConfigError);
}

TEST_CASE("credit samples pair each step with every later position") {
  const RolloutBatch b = split_into_segments(corridor(), 3);
  const auto samples = collect_credit_samples(b);
  CHECK(samples.size() == 3 * 4 / 2 + 1);
  // the last position of the first segment is its bootstrap state
  CHECK(samples[2].state == 0);
  CHECK(samples[2].future == 3);
  CHECK(samples.back().state == 3);
  CHECK(samples.back().future == 4);
}

TEST_CASE("rollout sampler hands out exactly the requested steps") {
  Rng rng(5);
  FrozenLakeConfig fl;
  const TabularMdp mdp = make_frozenlake(fl);
  const PolicyTable pi = PolicyTable::uniform(mdp);
  RolloutSampler sampler(mdp, 6);
  int prev_end = -1;
  for (int i = 0; i < 50; ++i) {
    const RolloutBatch b = sampler.collect(pi, rng, 16);
    CHECK(b.total_steps() == 16);
    CHECK_NOTHROW(b.validate());
    for (const auto& seg : b.segments) {
      CHECK(seg.start_time + static_cast<int>(seg.size()) <= 6);
      if (seg.start_time > 0) CHECK(seg.steps.front().state == prev_end);
      prev_end = seg.steps.back().next_state;
    }
  }
  CHECK(sampler.episodes_finished() > 0);
  CHECK_THROWS_AS(RolloutSampler(mdp, 0), ConfigError);
}
