#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hca/agents.hpp"
#include "hca/diagnostics.hpp"
#include "hca/hindsight.hpp"
#include "hca/mdp.hpp"

namespace hca {

enum class Algorithm { Reinforce, A2c, NStepA2c, Hca, HcaPrior, HcaValue, HcaValueClip };

std::string to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& name);
bool uses_credit(Algorithm algorithm);
bool uses_value(Algorithm algorithm);

/// frozenlake, frozenlake_penalty, delayed_chain, two_arm or chain3.
struct EnvironmentSpec {
  std::string name = "frozenlake";
  std::string map = "SFFF/FHFH/FFFH/HFFG";
  bool slippery = true;
  double hole_penalty = -1.0;  // frozenlake_penalty only
  int delay = 5;
  int decision_states = 1;
  int n_actions = 2;
};

struct ExperimentConfig {
  EnvironmentSpec env;
  Algorithm algorithm = Algorithm::HcaValue;
  double gamma = 0.99;
  int rollout_steps = 32;
  double lr_policy = 0.1;
  double lr_value = 0.1;
  double lr_credit = 0.5;
  double lr_reward = 0.5;
  double entropy_coef = 0.01;
  std::optional<double> lambda_clip;  // hca_value_clip only
  std::optional<int> n_step;          // n_step_a2c only
  int credit_batches_per_update = 8;
  double max_grad_norm = 0.5;
  long long budget_steps = 200'000;
  int replicates = 1;
  std::uint64_t base_seed = 0;
  std::string out_dir = "out";
  long long eval_every = 1000;
  int eval_episodes = 100;
  int max_episode_steps = 100;
  std::vector<std::string> update_order = {"credit", "value", "policy"};
  int nll_gap_delta_max = 0;  // > 0 records the NLL gap at every evaluation
  /// hca and hca_prior: "state" uses r̂ for the immediate reward and credit at
  /// S_k; "deep" credits every reward through C(a | S_t, S_{k+1}).
  std::string hca_estimator = "deep";

  double clip_lambda() const { return lambda_clip.value_or(3.0); }
  int steps_n() const { return n_step.value_or(5); }

  /// Throws ConfigError on out-of-range values or field/algorithm mismatches.
  void validate() const;
};

/// Flat `key = value` lines; '#' starts a comment. Unknown or repeated keys
/// are errors. The result is validated.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::filesystem::path& path);
void write_config(std::ostream& os, const ExperimentConfig& config);

/// The MDP the agent trains on.
TabularMdp make_environment(const EnvironmentSpec& env, double gamma);
/// Same dynamics with the original reward; penalty variants score without the penalty.
TabularMdp make_evaluation_environment(const EnvironmentSpec& env, double gamma);

struct MetricsRow {
  int replicate = 0;
  long long step = 0;
  double return_mean = 0.0;
  double entropy = 0.0;
  std::optional<double> credit_nll;
};

struct MetricsLog {
  std::string label;
  std::vector<MetricsRow> rows;  // grouped by replicate, steps increasing

  std::vector<int> replicate_ids() const;
  std::vector<const MetricsRow*> replicate_rows(int replicate) const;
};

void write_metrics_csv(std::ostream& os, const MetricsLog& log);
MetricsLog read_metrics_csv(std::istream& is, const std::string& label = "");

struct ReplicateResult {
  PolicyTable policy;
  ValueTable value;
  std::optional<CreditModel> credit;
};

struct ExperimentResult {
  MetricsLog metrics;
  std::vector<ReplicateResult> replicates;
  std::vector<NllGapRow> nll_gap;
  std::vector<EntropyRow> entropy;
};

/// Replicate i uses seed base_seed + i; training and each evaluation draw
/// from separate derived streams, so results do not depend on which thread
/// runs which replicate.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Trains one replicate; run_experiment fans these out.
ReplicateResult run_replicate(const ExperimentConfig& config, int replicate,
                              std::vector<MetricsRow>& metrics, std::vector<NllGapRow>& nll_gap,
                              std::vector<EntropyRow>& entropy);

/// metrics.csv, entropy.csv, nll_gap.csv (credit algorithms), config.txt, the
/// environment MDP and per-replicate policy/value/credit tables.
void write_experiment(const std::filesystem::path& dir, const ExperimentConfig& config,
                      const ExperimentResult& result);

struct SummaryRow {
  std::string label;
  long long step = 0;
  int n = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double se = 0.0;
};

struct Summary {
  std::vector<SummaryRow> curve;   // per label and evaluation step
  std::vector<SummaryRow> finals;  // last evaluation per label
  const SummaryRow& final_row(const std::string& label) const;
};

/// Throws AlignmentError when replicates of a log disagree on evaluation steps.
Summary summarize(const std::vector<MetricsLog>& logs);
void write_summary_csv(std::ostream& os, const Summary& summary);

/// Standard error of the difference of two independent means.
double pooled_se(const SummaryRow& a, const SummaryRow& b);

}  // namespace hca
