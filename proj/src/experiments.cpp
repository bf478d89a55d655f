#include "hca/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hca/agents.hpp"
#include "hca/envs.hpp"

namespace hca {

namespace {

int argmax(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

CollapseRun run_collapse(const CollapseConfig& config, bool use_value, std::uint64_t seed) {
  const TabularMdp mdp = make_chain(config.chain_length, config.n_actions, config.step_reward,
                                    config.step_reward, config.gamma);
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  Rng rng(seed);

  FixedCredit credit{A, std::vector<double>(static_cast<std::size_t>(S) * A, 0.0)};
  for (int s = 0; s < S; ++s) {
    double total = 0.0;
    for (int a = 0; a < A; ++a) total += credit.table[s * A + a] = 0.05 + rng.uniform();
    for (int a = 0; a < A; ++a) credit.table[s * A + a] /= total;
  }

  PolicyTable policy = PolicyTable::uniform(mdp);
  ValueTable value(S);
  // r̂ starts at the true expected reward. Starting it at zero makes untried
  // actions look better for a while, which adds noise unrelated to the credit.
  RewardModel reward_model(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) reward_model(s, a) = mdp.expected_reward(s, a);
  // The state before the terminal has no reward after its immediate one, so
  // no credit term ever moves it. Only the earlier states are scored.
  std::vector<int> live;
  for (int s = 0; s + 2 < S; ++s) live.push_back(s);

  CollapseRun run;
  run.entropy.reserve(static_cast<std::size_t>(config.iterations));
  for (int it = 0; it < config.iterations; ++it) {
    const RolloutBatch batch{{sample_trajectory(mdp, policy, rng, 10 * config.chain_length)}};
    UpdateEstimate update;
    if (use_value) {
      train_value(value, batch, mdp.gamma(), config.lr_value);
      update = hca_value_update(batch, policy, value, credit, mdp.gamma());
    } else {
      train_reward_model(reward_model, batch, config.lr_reward);
      update = hca_update(batch, policy, credit, reward_model, nullptr, mdp.gamma());
    }
    apply_update(policy, update, config.lr_policy, config.max_grad_norm);
    run.entropy.push_back(entropy_trace(policy, live));
  }
  run.final_entropy = run.entropy.back();
  run.min_entropy = *std::min_element(run.entropy.begin(), run.entropy.end());
  run.argmax_is_argmin_credit = true;
  for (int s : live) {
    const auto pi = policy.probs(s);
    std::vector<double> neg(A);
    for (int a = 0; a < A; ++a) neg[a] = -credit.table[s * A + a];
    if (argmax(pi) != argmax(neg)) run.argmax_is_argmin_credit = false;
  }
  return run;
}

NllGapCurve run_nll_gap_experiment(const NllGapExperimentConfig& config, std::uint64_t seed) {
  const DelayedChainConfig chain{config.decision_states, config.delay, config.n_actions, 1.0};
  const TabularMdp mdp = make_delayed_chain(chain);
  const auto layout = delayed_chain_layout(chain);
  const PolicyTable policy = PolicyTable::uniform(mdp);
  CreditModel model(mdp.n_states(), mdp.n_actions(), CreditParametrization::PolicyPrior);
  const int max_steps = 4 * mdp.n_states();

  Rng train_rng(derive_seed(seed, 0));
  for (int e = 0; e < config.train_episodes; ++e) {
    const Trajectory ep = sample_trajectory(mdp, policy, train_rng, max_steps);
    const auto samples = collect_credit_samples(split_into_segments(ep, config.segment_length));
    train_credit_model(model, policy, samples, config.lr_credit);
  }

  Rng eval_rng(derive_seed(seed, 1));
  RolloutBatch eval;
  for (int e = 0; e < config.eval_episodes; ++e) {
    auto part = split_into_segments(sample_trajectory(mdp, policy, eval_rng, max_steps),
                                    config.segment_length);
    for (auto& seg : part.segments) eval.segments.push_back(std::move(seg));
  }
  std::vector<bool> decisive(static_cast<std::size_t>(mdp.n_states()), false);
  for (int stage = 0; stage < config.decision_states; ++stage) decisive[layout.decision(stage)] = true;
  return nll_gap(model, policy, eval, config.delta_max, &decisive);
}

std::vector<UnbiasednessReport> check_unbiasedness(const TabularMdp& mdp, const PolicyTable& policy,
                                                   long long episodes, int segment_length,
                                                   std::uint64_t seed, double k) {
  const UpdateEstimate exact = exact_policy_gradient(mdp, policy).estimate;
  const ValueTable v = solve_policy_values(mdp, policy);
  const TransitionHindsight oracle = exact_transition_hindsight(mdp, policy, segment_length);
  const double g = mdp.gamma();

  const std::vector<std::pair<std::string, EpisodeEstimator>> estimators = {
      {"reinforce",
       [&](const Trajectory& ep) { return reinforce_update(RolloutBatch{{ep}}, policy, g); }},
      {"a2c",
       [&](const Trajectory& ep) {
         return a2c_update(split_into_segments(ep, segment_length), policy, v, g);
       }},
      {"hca_value",
       [&](const Trajectory& ep) {
         return hca_value_update(split_into_segments(ep, segment_length), policy, v,
                                 ExactTransitionCredit{&oracle}, g);
       }},
  };
  std::vector<UnbiasednessReport> out;
  for (std::size_t i = 0; i < estimators.size(); ++i) {
    McOptions opts;
    opts.episodes = episodes;
    opts.seed = derive_seed(seed, i);
    const McEstimate est = monte_carlo_update(mdp, policy, estimators[i].second, opts);
    if (est.truncated > 0)
      throw NumericalError("unbiasedness check: an episode hit the step cap", static_cast<double>(est.truncated));
    out.push_back(UnbiasednessReport{estimators[i].first, compare_to_exact(est, exact, k), episodes});
  }
  return out;
}

std::vector<CheckResult> frozenlake_claims(const Summary& standard, const Summary& penalty) {
  const SummaryRow& hca = standard.final_row("hca");
  const SummaryRow& prior = standard.final_row("hca_prior");
  const SummaryRow& value = standard.final_row("hca_value");
  const SummaryRow& prior_pen = penalty.final_row("hca_prior");
  const SummaryRow& value_pen = penalty.final_row("hca_value");
  std::vector<CheckResult> out;
  auto gap = [](const SummaryRow& hi, const SummaryRow& lo) {
    const double se = pooled_se(hi, lo);
    return se > 0.0 ? (hi.mean - lo.mean) / se : (hi.mean > lo.mean ? INFINITY : 0.0);
  };
  const double z1 = gap(value, prior);
  out.push_back({"standard: hca_value above hca_prior (pooled SE units)", z1, 2.0, z1 > 2.0,
                 fmt(value.mean) + " vs " + fmt(prior.mean)});
  const double z2 = gap(prior, hca);
  out.push_back({"standard: hca_prior above hca (pooled SE units)", z2, 2.0, z2 > 2.0,
                 fmt(prior.mean) + " vs " + fmt(hca.mean)});
  out.push_back({"penalty: hca_prior final return", prior_pen.mean, 0.05, prior_pen.mean <= 0.05,
                 "se " + fmt(prior_pen.se)});
  const double z3 = std::abs(gap(value_pen, value));
  out.push_back({"penalty: hca_value distance from standard (pooled SE units)", z3, 2.0, z3 <= 2.0,
                 fmt(value_pen.mean) + " vs " + fmt(value.mean)});
  return out;
}

FrozenLakeComparison compare_frozenlake(const ExperimentConfig& base, int seeds, long long steps,
                                        const std::filesystem::path& out_dir) {
  FrozenLakeComparison result;
  Summary combined;
  for (const std::string env : {"frozenlake", "frozenlake_penalty"}) {
    std::vector<MetricsLog> logs;
    for (const Algorithm alg : {Algorithm::Hca, Algorithm::HcaPrior, Algorithm::HcaValue}) {
      ExperimentConfig c = base;
      c.env.name = env;
      c.algorithm = alg;
      c.lambda_clip.reset();
      c.n_step.reset();
      c.replicates = seeds;
      c.budget_steps = steps;
      c.validate();
      ExperimentResult run = run_experiment(c);
      if (!out_dir.empty()) write_experiment(out_dir / env / to_string(alg), c, run);
      logs.push_back(std::move(run.metrics));
    }
    Summary s = summarize(logs);
    for (auto row : s.curve) {
      row.label = env + "/" + row.label;
      combined.curve.push_back(row);
    }
    for (auto row : s.finals) {
      row.label = env + "/" + row.label;
      combined.finals.push_back(row);
    }
    (env == "frozenlake" ? result.standard : result.penalty) = std::move(s);
  }
  result.claims = frozenlake_claims(result.standard, result.penalty);
  if (!out_dir.empty()) {
    std::ofstream os(out_dir / "summary.csv");
    if (!os) throw ConfigError("cannot write summary.csv in '" + out_dir.string() + "'");
    write_summary_csv(os, combined);
  }
  return result;
}

}  // namespace hca
