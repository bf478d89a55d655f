#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hca/diagnostics.hpp"
#include "hca/envs.hpp"
#include "support.hpp"

using namespace hca;

TEST_CASE("NLL gap is zero for the zero-residual model and counts pairs") {
  Rng rng(1);
  const TabularMdp mdp = make_delayed_chain({2, 2, 2, 1.0});
  const PolicyTable pi = test::random_policy(mdp, rng);
  const CreditModel zero(mdp.n_states(), 2);
  const RolloutBatch b = test::sample_episodes(mdp, pi, rng, 20);
  const NllGapCurve c = nll_gap(zero, pi, b, 5);
  CHECK(c.delta_max() == 5);
  for (int d = 1; d <= 5; ++d) {
    REQUIRE(c.gap(d).has_value());
    CHECK(std::abs(*c.gap(d)) < 1e-12);
  }
  // every episode has 7 steps; Δ = 5 fits at t = 0, 1, 2
  CHECK(c.count[0] == 20 * 7);
  CHECK(c.count[4] == 20 * 3);
  CHECK_THROWS_AS(nll_gap(zero, pi, b, 0), ConfigError);

  std::vector<bool> only_start(static_cast<std::size_t>(mdp.n_states()), false);
  only_start[0] = true;
  CHECK(nll_gap(zero, pi, b, 5, &only_start).count[0] == 20);
}

TEST_CASE("a model that knows the action has gap log pi") {
  const TabularMdp mdp = make_two_arm(1.0);
  PolicyTable pi(mdp.n_states(), 2);
  pi.logit(0, 1) = 1.0;
  CreditModel m(mdp.n_states(), 2, CreditParametrization::Plain);
  // outcomes 1 (bad) and 2 (good) reveal the action
  m.residual(0, 1)[0] = 40.0;
  m.residual(0, 2)[1] = 40.0;
  Rng rng(2);
  const RolloutBatch b = test::sample_episodes(mdp, pi, rng, 500);
  const auto p = pi.probs(0);
  double expect = 0.0;
  for (const auto& seg : b.segments) expect += std::log(p[seg.steps[0].action]);
  expect /= 500.0;
  CHECK(*nll_gap(m, pi, b, 1).gap(1) == doctest::Approx(expect).epsilon(1e-9));
  CHECK(!nll_gap(m, pi, b, 2).gap(2).has_value());
}

TEST_CASE("entropy of uniform and deterministic rows") {
  PolicyTable pi(2, 4);
  pi.logit(1, 2) = 100.0;
  CHECK(policy_entropy(pi, 0) == doctest::Approx(std::log(4.0)));
  CHECK(policy_entropy(pi, 1) < 1e-30 + 1e-35);
  CHECK(entropy_trace(pi, {0, 1}) == doctest::Approx(std::log(4.0) / 2));
  CHECK_THROWS_AS(entropy_trace(pi, {}), ConfigError);
}

TEST_CASE("identity check records the worst difference") {
  UpdateRule a = [](const RolloutBatch&) {
    UpdateEstimate u(1, 2);
    u.at(0, 0) = 1.0;
    return u;
  };
  UpdateRule b = [](const RolloutBatch&) {
    UpdateEstimate u(1, 2);
    u.at(0, 0) = 1.0 + 1e-9;
    return u;
  };
  const std::vector<RolloutBatch> batches(3);
  const IdentityReport same = check_identity("a~a", a, a, batches, 1e-12);
  CHECK(same.pass);
  CHECK(same.max_abs_diff == 0.0);
  const IdentityReport diff = check_identity("a~b", a, b, batches, 1e-12);
  CHECK(!diff.pass);
  CHECK(diff.max_abs_diff == doctest::Approx(1e-9));
}

TEST_CASE("csv writers emit the documented headers") {
  std::ostringstream gap, ent, id;
  NllGapCurve c;
  c.gap_sum = {-1.0, 0.0};
  c.count = {2, 0};
  std::vector<NllGapRow> rows;
  append_nll_gap_rows(rows, c, 3, 100);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].gap == -0.5);
  write_nll_gap_csv(gap, rows);
  CHECK(gap.str().rfind("replicate,step,delta,gap,count\n3,100,1,-0.5,2\n", 0) == 0);
  write_entropy_csv(ent, {{0, 5, 0.25}});
  CHECK(ent.str() == "replicate,step,entropy\n0,5,0.25\n");
  write_identity_csv(id, {{"x~y", 0.0, 1e-12, true}});
  CHECK(id.str().rfind("pair,max_abs_diff,pass\nx~y,0,true", 0) == 0);
}
