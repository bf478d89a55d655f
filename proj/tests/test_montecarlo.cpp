#include <doctest.h>

#include "hca/envs.hpp"
#include "hca/montecarlo.hpp"
#include "hca/reference.hpp"
#include "support.hpp"

using namespace hca;

TEST_CASE("parallel and serial Monte Carlo are bitwise identical") {
  Rng rng(1);
  FrozenLakeConfig fl;
  const TabularMdp mdp = make_frozenlake(fl);
  const PolicyTable pi = test::random_policy(mdp, rng, 0.3);
  const EpisodeEstimator est = [&](const Trajectory& ep) {
    return reinforce_update(RolloutBatch{{ep}}, pi, mdp.gamma());
  };
  McOptions opt;
  opt.episodes = 3000;
  opt.block_size = 256;
  opt.seed = 4;
  const McEstimate a = monte_carlo_update(mdp, pi, est, opt);
  const McEstimate b = monte_carlo_update_serial(mdp, pi, est, opt);
  CHECK(a.samples == 3000);
  CHECK(a.mean.grad == b.mean.grad);
  CHECK(a.std_error == b.std_error);
  opt.seed = 5;
  CHECK(monte_carlo_update(mdp, pi, est, opt).mean.grad != a.mean.grad);
}

TEST_CASE("REINFORCE sample mean brackets the exact TwoArm gradient") {
  const TabularMdp mdp = make_two_arm(1.0);
  PolicyTable pi(mdp.n_states(), 2);
  pi.logit(0, 0) = 0.3;
  const EpisodeEstimator est = [&](const Trajectory& ep) {
    return reinforce_update(RolloutBatch{{ep}}, pi, 1.0);
  };
  McOptions opt;
  opt.episodes = 20000;
  const McEstimate m = monte_carlo_update(mdp, pi, est, opt);
  const McComparison c = compare_to_exact(m, exact_policy_gradient(mdp, pi).estimate, 4.0);
  CHECK(c.violations == 0);
  CHECK(c.components == 6);
  // terminal rows never move, and they match exactly
  CHECK(m.std_error[2] == 0.0);
}

TEST_CASE("Monte Carlo rejects bad options") {
  const TabularMdp mdp = make_two_arm(1.0);
  const PolicyTable pi = PolicyTable::uniform(mdp);
  const EpisodeEstimator est = [&](const Trajectory& ep) {
    return reinforce_update(RolloutBatch{{ep}}, pi, 1.0);
  };
  McOptions opt;
  opt.episodes = 1;
  CHECK_THROWS_AS(monte_carlo_update(mdp, pi, est, opt), ConfigError);
  opt.episodes = 10;
  opt.block_size = 0;
  CHECK_THROWS_AS(monte_carlo_update(mdp, pi, est, opt), ConfigError);
  opt.block_size = 4;
  const McEstimate m = monte_carlo_update(mdp, pi, est, opt);
  CHECK_THROWS_AS(compare_to_exact(m, UpdateEstimate(2, 2), 3.0), ConfigError);
}
