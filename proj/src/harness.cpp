#include "hca/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "hca/mdp_io.hpp"
#include "hca/rng.hpp"

namespace hca {

namespace {

constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kEvalStreamBase = 1'000'000;

struct Evaluation {
  double return_mean = 0.0;
  double entropy = 0.0;
  RolloutBatch episodes;  // split into T-step segments
};

Evaluation evaluate(const TabularMdp& eval_mdp, const PolicyTable& policy, const ExperimentConfig& c,
                    Rng& rng) {
  Evaluation ev;
  std::vector<int> visited;
  double total = 0.0;
  for (int e = 0; e < c.eval_episodes; ++e) {
    const Trajectory episode = sample_trajectory(eval_mdp, policy, rng, c.max_episode_steps);
    total += episode.total_reward();
    for (const Step& st : episode.steps) visited.push_back(st.state);
    auto segments = split_into_segments(episode, c.rollout_steps).segments;
    for (auto& seg : segments) ev.episodes.segments.push_back(std::move(seg));
  }
  ev.return_mean = total / c.eval_episodes;
  ev.entropy = entropy_trace(policy, visited);
  return ev;
}

UpdateEstimate policy_update(const ExperimentConfig& c, const RolloutBatch& batch,
                             const PolicyTable& policy, const ValueTable& value,
                             const CreditModel* credit, const RewardModel& reward_model) {
  switch (c.algorithm) {
    case Algorithm::Reinforce:
      return reinforce_update(batch, policy, c.gamma);
    case Algorithm::A2c:
      return a2c_update(batch, policy, value, c.gamma);
    case Algorithm::NStepA2c:
      return n_step_a2c_update(batch, policy, value, c.gamma, c.steps_n());
    case Algorithm::Hca:
    case Algorithm::HcaPrior:
      if (c.hca_estimator == "deep")
        return deep_hca_update(batch, policy, LearnedCredit{credit, &policy, std::nullopt}, c.gamma);
      return hca_update(batch, policy, LearnedCredit{credit, &policy, std::nullopt}, reward_model,
                        &value, c.gamma);
    case Algorithm::HcaValue:
      return hca_value_update(batch, policy, value, LearnedCredit{credit, &policy, std::nullopt},
                              c.gamma);
    case Algorithm::HcaValueClip:
      return hca_value_update(batch, policy, value,
                              LearnedCredit{credit, &policy, c.clip_lambda()}, c.gamma);
  }
  throw ConfigError("unhandled algorithm");
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

}  // namespace

ReplicateResult run_replicate(const ExperimentConfig& c, int replicate,
                              std::vector<MetricsRow>& metrics, std::vector<NllGapRow>& nll_gap,
                              std::vector<EntropyRow>& entropy) {
  const TabularMdp mdp = make_environment(c.env, c.gamma);
  const TabularMdp eval_mdp = make_evaluation_environment(c.env, c.gamma);
  const std::uint64_t seed = c.base_seed + static_cast<std::uint64_t>(replicate);
  Rng rng(derive_seed(seed, kTrainStream));

  PolicyTable policy = PolicyTable::uniform(mdp);
  ValueTable value(mdp.n_states());
  RewardModel reward_model(mdp.n_states(), mdp.n_actions());
  std::optional<CreditModel> credit;
  if (uses_credit(c.algorithm))
    credit.emplace(mdp.n_states(), mdp.n_actions(),
                   c.algorithm == Algorithm::Hca ? CreditParametrization::Plain
                                                 : CreditParametrization::PolicyPrior);
  const bool needs_reward_model =
      (c.algorithm == Algorithm::Hca || c.algorithm == Algorithm::HcaPrior) && c.hca_estimator == "state";
  RolloutSampler sampler(mdp, c.max_episode_steps);

  long long steps = 0;
  long long eval_index = 0;
  long long last_eval_step = -1;
  auto record = [&]() {
    Rng eval_rng(derive_seed(seed, kEvalStreamBase + static_cast<std::uint64_t>(eval_index++)));
    const Evaluation ev = evaluate(eval_mdp, policy, c, eval_rng);
    MetricsRow row{replicate, steps, ev.return_mean, ev.entropy, std::nullopt};
    if (credit) {
      const auto samples = collect_credit_samples(ev.episodes);
      if (!samples.empty()) row.credit_nll = credit_nll(*credit, policy, samples);
      if (c.nll_gap_delta_max > 0)
        append_nll_gap_rows(nll_gap, hca::nll_gap(*credit, policy, ev.episodes, c.nll_gap_delta_max),
                            replicate, steps);
    }
    metrics.push_back(row);
    entropy.push_back(EntropyRow{replicate, steps, ev.entropy});
    last_eval_step = steps;
  };

  record();
  long long next_eval = c.eval_every;
  while (steps < c.budget_steps) {
    const int n = static_cast<int>(std::min<long long>(c.rollout_steps, c.budget_steps - steps));
    const RolloutBatch batch = sampler.collect(policy, rng, n);
    steps += n;
    for (const std::string& phase : c.update_order) {
      if (phase == "credit" && credit) {
        const auto samples = collect_credit_samples(batch);
        for (int i = 0; i < c.credit_batches_per_update; ++i)
          train_credit_model(*credit, policy, samples, c.lr_credit);
      } else if (phase == "value" && uses_value(c.algorithm)) {
        train_value(value, batch, c.gamma, c.lr_value);
        if (needs_reward_model) train_reward_model(reward_model, batch, c.lr_reward);
      } else if (phase == "policy") {
        UpdateEstimate update =
            policy_update(c, batch, policy, value, credit ? &*credit : nullptr, reward_model);
        if (c.entropy_coef > 0.0) add_entropy_bonus(update, batch, policy, c.entropy_coef);
        apply_update(policy, update, c.lr_policy, c.max_grad_norm);
      }
    }
    if (steps >= next_eval) {
      record();
      while (next_eval <= steps) next_eval += c.eval_every;
    }
  }
  if (last_eval_step != steps) record();
  return ReplicateResult{std::move(policy), std::move(value), std::move(credit)};
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const int R = config.replicates;
  std::vector<std::optional<ReplicateResult>> results(static_cast<std::size_t>(R));
  std::vector<std::vector<MetricsRow>> metrics(static_cast<std::size_t>(R));
  std::vector<std::vector<NllGapRow>> gaps(static_cast<std::size_t>(R));
  std::vector<std::vector<EntropyRow>> entropy(static_cast<std::size_t>(R));

#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < R; ++r)
    results[r] = run_replicate(config, r, metrics[r], gaps[r], entropy[r]);

  ExperimentResult out;
  out.metrics.label = to_string(config.algorithm);
  for (int r = 0; r < R; ++r) {
    out.replicates.push_back(std::move(*results[r]));
    out.metrics.rows.insert(out.metrics.rows.end(), metrics[r].begin(), metrics[r].end());
    out.nll_gap.insert(out.nll_gap.end(), gaps[r].begin(), gaps[r].end());
    out.entropy.insert(out.entropy.end(), entropy[r].begin(), entropy[r].end());
  }
  return out;
}

void write_experiment(const std::filesystem::path& dir, const ExperimentConfig& config,
                      const ExperimentResult& result) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream os(dir / name);
    if (!os) throw ConfigError("cannot write '" + (dir / name).string() + "'");
    return os;
  };
  {
    auto os = open("config.txt");
    write_config(os, config);
  }
  {
    auto os = open("metrics.csv");
    write_metrics_csv(os, result.metrics);
  }
  {
    auto os = open("entropy.csv");
    write_entropy_csv(os, result.entropy);
  }
  if (config.nll_gap_delta_max > 0) {
    auto os = open("nll_gap.csv");
    write_nll_gap_csv(os, result.nll_gap);
  }
  save_mdp(dir / "mdp.txt", make_environment(config.env, config.gamma));
  for (std::size_t r = 0; r < result.replicates.size(); ++r) {
    const auto& rep = result.replicates[r];
    const std::string tag = "replicate_" + std::to_string(r);
    {
      auto os = open(tag + "_policy.txt");
      write_policy(os, rep.policy);
    }
    {
      auto os = open(tag + "_value.txt");
      os << std::setprecision(std::numeric_limits<double>::max_digits10);
      os << "n_states " << rep.value.size() << "\nvalues\n";
      for (double v : rep.value.values) os << v << '\n';
    }
    if (rep.credit) {
      auto os = open(tag + "_credit.txt");
      write_credit_model(os, *rep.credit);
    }
  }
}

// ---------------------------------------------------------------------------
// Metrics

std::vector<int> MetricsLog::replicate_ids() const {
  std::vector<int> ids;
  for (const auto& row : rows)
    if (ids.empty() || ids.back() != row.replicate) ids.push_back(row.replicate);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<const MetricsRow*> MetricsLog::replicate_rows(int replicate) const {
  std::vector<const MetricsRow*> out;
  for (const auto& row : rows)
    if (row.replicate == replicate) out.push_back(&row);
  return out;
}

void write_metrics_csv(std::ostream& os, const MetricsLog& log) {
  os << "replicate,step,return_mean,entropy,credit_nll\n";
  for (const auto& row : log.rows) {
    os << row.replicate << ',' << row.step << ',' << format_double(row.return_mean) << ','
       << format_double(row.entropy) << ',';
    if (row.credit_nll) os << format_double(*row.credit_nll);
    os << '\n';
  }
}

MetricsLog read_metrics_csv(std::istream& is, const std::string& label) {
  MetricsLog log;
  log.label = label;
  std::string line;
  if (!std::getline(is, line) || line.rfind("replicate,step,return_mean", 0) != 0)
    throw ConfigError("metrics file: missing header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (cells.size() == 4) cells.emplace_back();
    if (cells.size() != 5) throw ConfigError("metrics file: bad row '" + line + "'");
    try {
      MetricsRow row{std::stoi(cells[0]), std::stoll(cells[1]), std::stod(cells[2]),
                     std::stod(cells[3]), std::nullopt};
      if (!cells[4].empty()) row.credit_nll = std::stod(cells[4]);
      log.rows.push_back(row);
    } catch (const std::logic_error&) {
      throw ConfigError("metrics file: bad row '" + line + "'");
    }
  }
  return log;
}

// ---------------------------------------------------------------------------
// Summary

const SummaryRow& Summary::final_row(const std::string& label) const {
  for (const auto& row : finals)
    if (row.label == label) return row;
  throw ConfigError("summary has no algorithm '" + label + "'");
}

Summary summarize(const std::vector<MetricsLog>& logs) {
  if (logs.empty()) throw ConfigError("summarize: no logs");
  Summary summary;
  for (const auto& log : logs) {
    const auto ids = log.replicate_ids();
    if (ids.empty()) throw ConfigError("summarize: log '" + log.label + "' is empty");
    std::vector<std::vector<const MetricsRow*>> per(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) per[i] = log.replicate_rows(ids[i]);
    const std::size_t points = per[0].size();
    for (const auto& rows : per) {
      if (rows.size() != points)
        throw AlignmentError("summarize: replicates of '" + log.label +
                             "' have different numbers of evaluation points");
      for (std::size_t j = 0; j < points; ++j)
        if (rows[j]->step != per[0][j]->step)
          throw AlignmentError("summarize: replicates of '" + log.label +
                               "' were evaluated at different steps");
    }
    for (std::size_t j = 0; j < points; ++j) {
      SummaryRow row;
      row.label = log.label;
      row.step = per[0][j]->step;
      row.n = static_cast<int>(per.size());
      row.min = std::numeric_limits<double>::infinity();
      row.max = -std::numeric_limits<double>::infinity();
      double sum = 0.0;
      for (const auto& rows : per) {
        const double v = rows[j]->return_mean;
        sum += v;
        row.min = std::min(row.min, v);
        row.max = std::max(row.max, v);
      }
      row.mean = sum / row.n;
      double ss = 0.0;
      for (const auto& rows : per) ss += (rows[j]->return_mean - row.mean) * (rows[j]->return_mean - row.mean);
      row.se = row.n > 1 ? std::sqrt(ss / (row.n - 1) / row.n) : 0.0;
      summary.curve.push_back(row);
    }
    summary.finals.push_back(summary.curve.back());
  }
  return summary;
}

void write_summary_csv(std::ostream& os, const Summary& summary) {
  os << "kind,algorithm,step,n,mean,min,max,se\n";
  auto emit = [&](const char* kind, const SummaryRow& r) {
    os << kind << ',' << r.label << ',' << r.step << ',' << r.n << ',' << format_double(r.mean) << ','
       << format_double(r.min) << ',' << format_double(r.max) << ',' << format_double(r.se) << '\n';
  };
  for (const auto& r : summary.curve) emit("curve", r);
  for (const auto& r : summary.finals) emit("final", r);
}

double pooled_se(const SummaryRow& a, const SummaryRow& b) {
  return std::sqrt(a.se * a.se + b.se * b.se);
}

}  // namespace hca
