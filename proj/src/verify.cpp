#include "hca/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "hca/agents.hpp"
#include "hca/envs.hpp"
#include "hca/expected_updates.hpp"
#include "hca/reference.hpp"

namespace hca {

namespace {

int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.uniform() * (hi - lo + 1));
}

PolicyTable random_policy(const TabularMdp& mdp, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  PolicyTable policy = PolicyTable::uniform(mdp);
  for (double& l : policy.logits()) l = normal(rng.engine());
  return policy;
}

TabularMdp random_mdp(Rng& rng, RewardKind kind, int min_states, int max_states, double gamma) {
  RandomMdpConfig cfg;
  cfg.n_states = uniform_int(rng, min_states, max_states);
  cfg.n_actions = uniform_int(rng, 2, 4);
  cfg.n_terminal = uniform_int(rng, 1, 2);
  cfg.gamma = gamma;
  cfg.reward_kind = kind;
  cfg.max_successors = std::min(cfg.n_states, 4);
  return make_random_mdp(cfg, rng);
}

std::vector<std::pair<std::string, TabularMdp>> bundled_mdps() {
  std::vector<std::pair<std::string, TabularMdp>> out;
  out.emplace_back("two_arm", make_two_arm());
  out.emplace_back("chain3", make_chain3());
  out.emplace_back("delayed_chain", make_delayed_chain(DelayedChainConfig{2, 3, 2, 1.0}));
  out.emplace_back("frozenlake", make_frozenlake(FrozenLakeConfig{}));
  FrozenLakeConfig penalty;
  penalty.hole_penalty = -1.0;
  out.emplace_back("frozenlake_penalty", make_frozenlake(penalty));
  return out;
}

struct Draw {
  TabularMdp mdp;
  PolicyTable policy;
  ValueTable value;
  RolloutBatch batch;
  int T;
};

Draw random_draw(Rng& rng, bool whole_episodes) {
  const auto kind = rng.uniform() < 0.5 ? RewardKind::NextStateOnly : RewardKind::FullTransition;
  const double gamma = 0.5 + 0.5 * rng.uniform();
  TabularMdp mdp = random_mdp(rng, kind, 3, 10, gamma);
  PolicyTable policy = random_policy(mdp, rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  ValueTable value(mdp.n_states());
  for (double& v : value.values) v = normal(rng.engine());
  const int T = uniform_int(rng, 1, 32);
  RolloutBatch batch;
  if (whole_episodes) {
    for (int e = 0; e < 4; ++e) batch.segments.push_back(sample_trajectory(mdp, policy, rng, 200));
  } else {
    RolloutSampler sampler(mdp, uniform_int(rng, 5, 60));
    for (int i = 0; i < 4; ++i) {
      auto part = sampler.collect(policy, rng, T);
      for (auto& seg : part.segments) batch.segments.push_back(std::move(seg));
    }
  }
  return Draw{std::move(mdp), std::move(policy), std::move(value), std::move(batch), T};
}

IdentityReport run_identity(const std::string& pair, int draws, std::uint64_t seed, double tol,
                            bool whole_episodes,
                            const std::function<double(const Draw&)>& diff) {
  Rng rng(seed);
  IdentityReport report{pair, 0.0, tol, false};
  for (int i = 0; i < draws; ++i) {
    const Draw d = random_draw(rng, whole_episodes);
    report.max_abs_diff = std::max(report.max_abs_diff, diff(d));
  }
  report.pass = report.max_abs_diff <= tol;
  return report;
}

CheckResult from_identity(const IdentityReport& r) {
  return CheckResult{r.pair, r.max_abs_diff, r.tol, r.pass, ""};
}

template <class ExpectedFn>
CheckResult theorem_check(const std::string& name, int n_random, std::uint64_t seed, RewardKind kind,
                          double tol, ExpectedFn expected) {
  Rng rng(seed);
  std::vector<std::pair<std::string, TabularMdp>> cases;
  for (int i = 0; i < n_random; ++i)
    cases.emplace_back("random_" + std::to_string(i), random_mdp(rng, kind, 4, 20, 0.9));
  for (auto& c : bundled_mdps()) cases.push_back(std::move(c));
  CheckResult out{name, 0.0, tol, true, ""};
  std::ostringstream detail;
  detail.precision(3);
  for (const auto& [label, mdp] : cases) {
    const PolicyTable policy = random_policy(mdp, rng);
    const int D = hindsight_horizon(mdp, policy);
    const ExactGradient exact = exact_policy_gradient(mdp, policy);
    const double diff = max_abs_diff(expected(mdp, policy, D), exact.estimate);
    out.value = std::max(out.value, diff);
    detail << label << '=' << diff << ' ';
  }
  out.pass = out.value <= tol;
  out.detail = detail.str();
  return out;
}

}  // namespace

CheckResult check_next_state_theorem(int n_random, std::uint64_t seed, double tol) {
  return theorem_check("next_state_credit_matches_gradient", n_random, seed,
                       RewardKind::NextStateOnly, tol,
                       [](const TabularMdp& mdp, const PolicyTable& policy, int D) {
                         return expected_next_state_credit_update(mdp, policy,
                                                                  exact_hindsight(mdp, policy, D));
                       });
}

CheckResult check_transition_theorem(int n_random, std::uint64_t seed, bool augmented, double tol) {
  return theorem_check(augmented ? "transition_credit_augmented_matches_gradient"
                                 : "transition_credit_matches_gradient",
                       n_random, seed, RewardKind::FullTransition, tol,
                       [augmented](const TabularMdp& mdp, const PolicyTable& policy, int D) {
                         const auto oracle = exact_transition_hindsight(mdp, policy, D);
                         if (!augmented) return expected_transition_credit_update(mdp, policy, oracle);
                         const ValueTable v = solve_policy_values(mdp, policy);
                         return expected_transition_credit_update(mdp, policy, oracle, &v);
                       });
}

IdentityReport check_a2c_identity(int draws, std::uint64_t seed, double tol) {
  return run_identity("hca_value_indicator~a2c", draws, seed, tol, false, [](const Draw& d) {
    const double g = d.mdp.gamma();
    return max_abs_diff(hca_value_update(d.batch, d.policy, d.value, IndicatorCredit{}, g),
                        a2c_update(d.batch, d.policy, d.value, g));
  });
}

IdentityReport check_n_step_identity(int draws, int n, std::uint64_t seed, double tol) {
  const std::string label = n > 0 ? std::to_string(n) : "T";
  return run_identity("hca_value_n_step_indicator~n_step_a2c(N=" + label + ")", draws, seed, tol,
                      false, [n](const Draw& d) {
                        const double g = d.mdp.gamma();
                        const int N = n > 0 ? n : d.T;
                        return max_abs_diff(
                            hca_value_update(d.batch, d.policy, d.value, NStepIndicatorCredit{N}, g),
                            n_step_a2c_update(d.batch, d.policy, d.value, g, N));
                      });
}

IdentityReport check_zero_value_identity(int draws, std::uint64_t seed, double tol) {
  return run_identity("a2c_zero_value~reinforce", draws, seed, tol, true, [](const Draw& d) {
    const ValueTable zero(d.mdp.n_states());
    const double g = d.mdp.gamma();
    return max_abs_diff(a2c_update(d.batch, d.policy, zero, g), reinforce_update(d.batch, d.policy, g));
  });
}

IdentityReport check_deep_indicator_identity(int draws, std::uint64_t seed, double tol) {
  return run_identity("deep_hca_indicator~reinforce", draws, seed, tol, true, [](const Draw& d) {
    const double g = d.mdp.gamma();
    return max_abs_diff(deep_hca_update(d.batch, d.policy, IndicatorCredit{}, g),
                        reinforce_update(d.batch, d.policy, g));
  });
}

CheckResult check_telescoping(int draws, std::uint64_t seed, double tol) {
  Rng rng(seed);
  CheckResult out{"augmented_reward_telescoping", 0.0, tol, true, ""};
  long long positions = 0;
  for (int i = 0; i < draws; ++i) {
    const Draw d = random_draw(rng, false);
    const double g = d.mdp.gamma();
    for (const Trajectory& seg : d.batch.segments) {
      const std::size_t L = seg.steps.size();
      const auto boot = bootstrap_state(seg);
      for (std::size_t t = 0; t < L; ++t) {
        double lhs = 0.0, rewards = 0.0, discount = 1.0;
        for (std::size_t k = t; k < L; ++k, discount *= g) {
          const Step& st = seg.steps[k];
          lhs += discount * augmented_reward(d.value, st.state, st.reward, st.next_state, g, st.terminal);
          rewards += discount * st.reward;
        }
        const double rhs = rewards + (boot ? discount * d.value[*boot] : 0.0) - d.value[seg.steps[t].state];
        out.value = std::max(out.value, std::abs(lhs - rhs));
        ++positions;
      }
    }
  }
  out.pass = out.value <= tol;
  out.detail = std::to_string(positions) + " positions";
  return out;
}

CheckResult check_shaping_invariance() {
  CheckResult out{"shaping_preserves_greedy_policy", 0.0, 0.0, true, ""};
  int mismatches = 0, compared = 0;
  for (double penalty : {0.0, -1.0}) {
    FrozenLakeConfig cfg;
    cfg.hole_penalty = penalty;
    const TabularMdp mdp = make_frozenlake(cfg);
    const ValueTable potential = solve_policy_values(mdp, PolicyTable::uniform(mdp));
    const TabularMdp shaped = shape_rewards(mdp, potential);
    const auto vi = value_iteration(mdp);
    const auto vi_shaped = value_iteration(shaped);
    for (int s = 0; s < mdp.n_states(); ++s) {
      if (mdp.is_terminal(s)) continue;
      ++compared;
      if (greedy_actions(vi, mdp.n_actions(), s) != greedy_actions(vi_shaped, mdp.n_actions(), s))
        ++mismatches;
    }
  }
  out.value = mismatches;
  out.pass = mismatches == 0;
  out.detail = std::to_string(compared) + " states compared";
  return out;
}

CheckResult check_zero_residual(std::uint64_t seed, double tol) {
  Rng rng(seed);
  CheckResult out{"zero_residual_credit_equals_policy", 0.0, tol, true, ""};
  for (int i = 0; i < 10; ++i) {
    const int S = uniform_int(rng, 2, 12);
    const int A = uniform_int(rng, 2, 6);
    std::normal_distribution<double> normal(0.0, 3.0);
    PolicyTable policy(S, A);
    for (double& l : policy.logits()) l = normal(rng.engine());
    const CreditModel model(S, A, CreditParametrization::PolicyPrior);
    for (int s = 0; s < S; ++s) {
      const auto pi = policy.probs(s);
      for (int f = 0; f < S; ++f) {
        const auto h = credit_prob(model, policy, s, f);
        for (int a = 0; a < A; ++a) out.value = std::max(out.value, std::abs(h[a] - pi[a]));
      }
    }
  }
  out.pass = out.value <= tol;
  return out;
}

CheckResult check_two_arm_credit_training(std::uint64_t seed, double tol) {
  const TabularMdp mdp = make_two_arm();
  const int rewarded = delayed_chain_layout(DelayedChainConfig{1, 0, 2, 1.0}).good_outcome(0);
  const PolicyTable policy = PolicyTable::uniform(mdp);
  CreditModel model(mdp.n_states(), mdp.n_actions(), CreditParametrization::PolicyPrior);
  Rng rng(seed);
  for (int it = 0; it < 2000; ++it) {
    std::vector<CreditSample> batch;
    for (int e = 0; e < 32; ++e) {
      const Trajectory ep = sample_trajectory(mdp, policy, rng, 10);
      for (auto& s : collect_credit_samples(RolloutBatch{{ep}})) batch.push_back(s);
    }
    train_credit_model(model, policy, batch, 0.5);
  }
  const CreditSample pair{0, kRewardedAction, rewarded};
  const double nll = credit_nll(model, policy, std::span<const CreditSample>(&pair, 1));
  return CheckResult{"two_arm_rewarded_pair_nll", nll, tol, nll < tol, ""};
}

CheckResult check_clip_bound(std::uint64_t seed, double lambda) {
  Rng rng(seed);
  CheckResult out{"clipped_credit_bound", 0.0, 0.0, true, ""};
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const int A = uniform_int(rng, 2, 6);
    std::vector<double> h(A), pi(A);
    double th = 0.0, tp = 0.0;
    for (int a = 0; a < A; ++a) {
      h[a] = -std::log(1.0 - rng.uniform());
      pi[a] = -std::log(1.0 - rng.uniform()) + 1e-3;
      th += h[a];
      tp += pi[a];
    }
    for (int a = 0; a < A; ++a) {
      h[a] /= th;
      pi[a] /= tp;
    }
    const auto clipped = clip_credit(h, pi, lambda);
    for (int a = 0; a < A; ++a)
      if (!(clipped[a] <= h[a] && clipped[a] <= lambda * pi[a])) ++violations;
  }
  out.value = violations;
  out.pass = violations == 0;
  return out;
}

CheckResult check_serial_parallel_agreement(std::uint64_t seed) {
  Rng rng(seed);
  CheckResult out{"parallel_kernels_match_serial", 0.0, 1e-12, true, ""};
  const TabularMdp mdp = random_mdp(rng, RewardKind::FullTransition, 12, 12, 0.9);
  const PolicyTable policy = random_policy(mdp, rng);
  const int D = 20;
  const auto par = exact_hindsight(mdp, policy, D);
  const auto ser = exact_hindsight_serial(mdp, policy, D);
  double hd = 0.0;
  for (int d = 1; d <= D; ++d)
    for (int s = 0; s < mdp.n_states(); ++s)
      for (int f = 0; f < mdp.n_states(); ++f) {
        hd = std::max(hd, std::abs(par.reach(d, s, f) - ser.reach(d, s, f)));
        if (!par.defined(d, s, f) || !ser.defined(d, s, f)) continue;
        for (int a = 0; a < mdp.n_actions(); ++a)
          hd = std::max(hd, std::abs(par.prob(d, s, f, a) - ser.prob(d, s, f, a)));
      }
  const auto v_par = evaluate_policy(mdp, policy, 1e-13);
  const auto v_ser = evaluate_policy_serial(mdp, policy, PolicyEvaluationOptions{1e-13});
  double vd = 0.0;
  for (int s = 0; s < mdp.n_states(); ++s) vd = std::max(vd, std::abs(v_par[s] - v_ser[s]));
  const EpisodeEstimator est = [&](const Trajectory& ep) {
    return reinforce_update(RolloutBatch{{ep}}, policy, mdp.gamma());
  };
  const McOptions opts{3000, seed, 1000, 256};
  const auto mc_par = monte_carlo_update(mdp, policy, est, opts);
  const auto mc_ser = monte_carlo_update_serial(mdp, policy, est, opts);
  double md = max_abs_diff(mc_par.mean, mc_ser.mean);
  for (std::size_t i = 0; i < mc_par.std_error.size(); ++i)
    md = std::max(md, std::abs(mc_par.std_error[i] - mc_ser.std_error[i]));
  out.value = std::max({hd, vd, md});
  out.pass = out.value <= out.tol;
  std::ostringstream detail;
  detail.precision(3);
  detail << "hindsight=" << hd << " evaluation=" << vd << " monte_carlo=" << md;
  out.detail = detail.str();
  return out;
}

std::vector<CheckResult> run_verification_suite(std::uint64_t seed,
                                                std::vector<IdentityReport>* identities) {
  std::vector<IdentityReport> reports = {
      check_a2c_identity(30, derive_seed(seed, 1)),
      check_n_step_identity(30, 1, derive_seed(seed, 2)),
      check_n_step_identity(30, 5, derive_seed(seed, 3)),
      check_n_step_identity(30, 0, derive_seed(seed, 4)),
      check_zero_value_identity(30, derive_seed(seed, 5)),
      check_deep_indicator_identity(30, derive_seed(seed, 6)),
  };
  std::vector<CheckResult> out;
  out.push_back(check_next_state_theorem(3, derive_seed(seed, 10)));
  out.push_back(check_transition_theorem(3, derive_seed(seed, 11), false));
  out.push_back(check_transition_theorem(2, derive_seed(seed, 12), true));
  for (const auto& r : reports) out.push_back(from_identity(r));
  out.push_back(check_telescoping(30, derive_seed(seed, 13)));
  out.push_back(check_shaping_invariance());
  out.push_back(check_zero_residual(derive_seed(seed, 14)));
  out.push_back(check_two_arm_credit_training(derive_seed(seed, 15)));
  out.push_back(check_clip_bound(derive_seed(seed, 16)));
  out.push_back(check_serial_parallel_agreement(derive_seed(seed, 17)));
  if (identities) *identities = std::move(reports);
  return out;
}

}  // namespace hca
