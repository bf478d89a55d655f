#include <doctest.h>

#include "hca/envs.hpp"
#include "hca/experiments.hpp"
#include "hca/verify.hpp"
#include "support.hpp"

using namespace hca;

TEST_CASE("verification suite passes and reports every identity") {
  std::vector<IdentityReport> ids;
  const auto checks = run_verification_suite(3, &ids);
  CHECK(checks.size() >= 10);
  for (const auto& c : checks) {
    CAPTURE(c.name);
    CHECK(c.pass);
  }
  CHECK(ids.size() == 6);
}

TEST_CASE("collapse happens for hca and not for hca_value") {
  CollapseConfig cfg;
  cfg.iterations = 1500;
  const CollapseRun h = run_collapse(cfg, false, 2);
  const CollapseRun v = run_collapse(cfg, true, 2);
  CHECK(h.entropy.size() == 1500);
  CHECK(h.final_entropy < 0.05);
  CHECK(h.argmax_is_argmin_credit);
  CHECK(v.min_entropy > 0.5);
}

TEST_CASE("trained credit separates informative offsets") {
  NllGapExperimentConfig cfg;
  cfg.train_episodes = 1500;
  cfg.eval_episodes = 200;
  const NllGapCurve c = run_nll_gap_experiment(cfg, 1);
  CHECK(*c.gap(1) < -0.1);
  CHECK(std::abs(*c.gap(10)) < 0.05);
}

TEST_CASE("unbiasedness report on TwoArm") {
  const TabularMdp mdp = make_two_arm(0.9);
  Rng rng(5);
  const PolicyTable pi = test::random_policy(mdp, rng);
  const auto reports = check_unbiasedness(mdp, pi, 5000, 2, 1, 4.0);
  REQUIRE(reports.size() == 3);
  for (const auto& r : reports) {
    CAPTURE(r.label);
    CHECK(r.comparison.violations == 0);
  }
}

TEST_CASE("frozen lake claims read the final rows") {
  auto row = [](const std::string& label, double mean, double se) {
    SummaryRow r;
    r.label = label;
    r.mean = mean;
    r.se = se;
    r.n = 100;
    return r;
  };
  Summary standard, penalty;
  standard.finals = {row("hca", 0.1, 0.01), row("hca_prior", 0.3, 0.01), row("hca_value", 0.6, 0.01)};
  penalty.finals = {row("hca", 0.0, 0.01), row("hca_prior", 0.01, 0.005), row("hca_value", 0.61, 0.01)};
  auto claims = frozenlake_claims(standard, penalty);
  REQUIRE(claims.size() == 4);
  for (const auto& c : claims) CHECK(c.pass);
  penalty.finals[2].mean = 0.7;
  penalty.finals[1].mean = 0.2;
  claims = frozenlake_claims(standard, penalty);
  CHECK(!claims[2].pass);
  CHECK(!claims[3].pass);
}
