#include <doctest.h>

#include "hca/envs.hpp"
#include "hca/expected_updates.hpp"
#include "hca/hindsight.hpp"
#include "support.hpp"

using namespace hca;

TEST_CASE("enumerated next-state credit update equals the exact gradient") {
  Rng rng(12);
  for (int i = 0; i < 3; ++i) {
    RandomMdpConfig cfg;
    cfg.n_states = 6 + 3 * i;
    cfg.n_actions = 2 + i;
    const TabularMdp mdp = make_random_mdp(cfg, rng);
    const PolicyTable pi = test::random_policy(mdp, rng);
    const ExactHindsight h = exact_hindsight(mdp, pi, hindsight_horizon(mdp, pi));
    const UpdateEstimate e = expected_next_state_credit_update(mdp, pi, h);
    CHECK(max_abs_diff(e, exact_policy_gradient(mdp, pi).estimate) < 1e-9);
    // with V = 0 the augmented rewards are the raw rewards
    const UpdateEstimate ev = expected_state_credit_value_update(mdp, pi, ValueTable(mdp.n_states()), h);
    CHECK(max_abs_diff(ev, e) < 1e-12);
    // a nonzero V is credited through S_{k+1} while it was paid at S_k, so the
    // state form is biased; the transition form in the next test is not
    const ValueTable v = solve_policy_values(mdp, pi);
    CHECK(max_abs_diff(expected_state_credit_value_update(mdp, pi, v, h), e) > 1e-6);
  }
}

TEST_CASE("enumerated transition credit update equals the exact gradient") {
  Rng rng(13);
  RandomMdpConfig cfg;
  cfg.n_states = 7;
  cfg.reward_kind = RewardKind::FullTransition;
  const TabularMdp mdp = make_random_mdp(cfg, rng);
  const PolicyTable pi = test::random_policy(mdp, rng);
  const TransitionHindsight th = exact_transition_hindsight(mdp, pi, hindsight_horizon(mdp, pi));
  const UpdateEstimate exact = exact_policy_gradient(mdp, pi).estimate;
  CHECK(max_abs_diff(expected_transition_credit_update(mdp, pi, th), exact) < 1e-9);
  const ValueTable v = solve_policy_values(mdp, pi);
  CHECK(max_abs_diff(expected_transition_credit_update(mdp, pi, th, &v), exact) < 1e-9);
}

TEST_CASE("state credit is not exact for action-dependent rewards") {
  // With rewards that depend on (s, a), conditioning on the next state alone
  // misses the reward's action dependence; the transition form is needed.
  Rng rng(14);
  RandomMdpConfig cfg;
  cfg.n_states = 6;
  cfg.reward_kind = RewardKind::FullTransition;
  const TabularMdp mdp = make_random_mdp(cfg, rng);
  const PolicyTable pi = test::random_policy(mdp, rng);
  const ExactHindsight h = exact_hindsight(mdp, pi, hindsight_horizon(mdp, pi));
  const UpdateEstimate exact = exact_policy_gradient(mdp, pi).estimate;
  const ValueTable v = solve_policy_values(mdp, pi);
  CHECK(max_abs_diff(expected_state_credit_value_update(mdp, pi, v, h), exact) > 1e-6);
}
