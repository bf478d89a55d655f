// hca: train, verify and diagnose tabular hindsight credit assignment agents.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "hca/experiments.hpp"
#include "hca/mdp_io.hpp"
#include "hca/verify.hpp"

namespace fs = std::filesystem;
using namespace hca;

namespace {

struct Overrides {
  std::string config;
  std::optional<int> seeds;
  std::optional<std::string> out;
  std::optional<std::string> algo;
  std::optional<long long> steps;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write '" + path.string() + "'");
  return os;
}

void print_check(const CheckResult& c) {
  std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  value=" << std::setprecision(6)
            << c.value << " tol=" << c.tol;
  if (!c.detail.empty()) std::cout << "  (" << c.detail << ")";
  std::cout << '\n';
}

int cmd_run(const Overrides& o) {
  ExperimentConfig config = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.seeds) config.replicates = *o.seeds;
  if (o.out) config.out_dir = *o.out;
  if (o.steps) config.budget_steps = *o.steps;
  if (o.algo) {
    config.algorithm = algorithm_from_string(*o.algo);
    if (config.algorithm != Algorithm::HcaValueClip) config.lambda_clip.reset();
    if (config.algorithm != Algorithm::NStepA2c) config.n_step.reset();
    if (!uses_credit(config.algorithm)) config.nll_gap_delta_max = 0;
  }
  config.validate();

  const ExperimentResult result = run_experiment(config);
  const fs::path dir = config.out_dir;
  write_experiment(dir, config, result);
  const Summary summary = summarize({result.metrics});
  auto os = open_out(dir / "summary.csv");
  write_summary_csv(os, summary);
  const SummaryRow& last = summary.finals.front();
  std::cout << to_string(config.algorithm) << " on " << config.env.name << ": final return "
            << last.mean << " (se " << last.se << ", n " << last.n << ") -> " << dir.string() << '\n';
  return 0;
}

int cmd_verify(const Overrides& o, std::uint64_t seed) {
  std::vector<IdentityReport> identities;
  const auto checks = run_verification_suite(seed, &identities);
  bool ok = true;
  for (const auto& c : checks) {
    print_check(c);
    ok = ok && c.pass;
  }
  if (o.out) {
    fs::create_directories(*o.out);
    auto os = open_out(fs::path(*o.out) / "identity_report.csv");
    write_identity_csv(os, identities);
  }
  std::cout << (ok ? "all checks passed" : "some checks FAILED") << '\n';
  return ok ? 0 : 1;
}

// Recomputes diagnostics for a finished run from its saved tables.
int cmd_diagnose(const fs::path& run_dir, const Overrides& o, std::uint64_t seed, int episodes) {
  ExperimentConfig config = load_config(run_dir / "config.txt");
  const TabularMdp mdp = load_mdp(run_dir / "mdp.txt");
  const fs::path out = o.out ? fs::path(*o.out) : run_dir;
  fs::create_directories(out);
  const int delta_max = config.nll_gap_delta_max > 0 ? config.nll_gap_delta_max : config.rollout_steps;

  std::vector<NllGapRow> gaps;
  std::vector<EntropyRow> entropies;
  for (int r = 0;; ++r) {
    const fs::path policy_path = run_dir / ("replicate_" + std::to_string(r) + "_policy.txt");
    if (!fs::exists(policy_path)) break;
    std::ifstream pin(policy_path);
    const PolicyTable policy = read_policy(pin);

    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    RolloutBatch batch;
    std::vector<bool> seen(static_cast<std::size_t>(mdp.n_states()), false);
    for (int e = 0; e < episodes; ++e) {
      const Trajectory ep = sample_trajectory(mdp, policy, rng, config.max_episode_steps);
      for (const auto& step : ep.steps) seen[step.state] = true;
      for (auto& seg : split_into_segments(ep, config.rollout_steps).segments)
        batch.segments.push_back(std::move(seg));
    }
    std::vector<int> visited;
    for (int s = 0; s < mdp.n_states(); ++s)
      if (seen[s]) visited.push_back(s);
    const double h = visited.empty() ? 0.0 : entropy_trace(policy, visited);
    entropies.push_back({r, config.budget_steps, h});

    const fs::path credit_path = run_dir / ("replicate_" + std::to_string(r) + "_credit.txt");
    std::optional<double> gap1;
    if (fs::exists(credit_path)) {
      std::ifstream cin(credit_path);
      const CreditModel credit = read_credit_model(cin);
      const NllGapCurve curve = nll_gap(credit, policy, batch, delta_max);
      append_nll_gap_rows(gaps, curve, r, config.budget_steps);
      gap1 = curve.gap(1);
    }
    std::cout << "replicate " << r << ": entropy " << h;
    if (gap1) std::cout << ", nll gap at delta 1 " << *gap1;
    std::cout << '\n';
  }
  if (entropies.empty()) throw ConfigError("no replicate tables in '" + run_dir.string() + "'");
  {
    auto os = open_out(out / "entropy.csv");
    write_entropy_csv(os, entropies);
  }
  if (!gaps.empty()) {
    auto os = open_out(out / "nll_gap.csv");
    write_nll_gap_csv(os, gaps);
  }
  return 0;
}

int cmd_repro(const Overrides& o) {
  ExperimentConfig base = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  const int seeds = o.seeds.value_or(100);
  const long long steps = o.steps.value_or(base.budget_steps);
  const fs::path out = o.out.value_or("repro_frozenlake");
  const FrozenLakeComparison cmp = compare_frozenlake(base, seeds, steps, out);
  for (const auto* s : {&cmp.standard, &cmp.penalty})
    for (const auto& row : s->finals)
      std::cout << (s == &cmp.standard ? "frozenlake         " : "frozenlake_penalty ") << std::left
                << std::setw(10) << row.label << std::right << " final return " << row.mean
                << " (se " << row.se << ")\n";
  bool ok = true;
  for (const auto& c : cmp.claims) {
    print_check(c);
    ok = ok && c.pass;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular hindsight credit assignment"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  Overrides o;
  std::uint64_t seed = 0;
  int episodes = 200;
  fs::path run_dir;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--seeds", o.seeds, "number of replicates")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--algo", o.algo, "reinforce|a2c|n_step_a2c|hca|hca_prior|hca_value|hca_value_clip");
    sub->add_option("--steps", o.steps, "environment steps per replicate")->check(CLI::PositiveNumber);
  };
  auto* run = app.add_subcommand("run", "train agents and write metrics");
  add_common(run);
  auto* verify = app.add_subcommand("verify", "check theorems and identities");
  add_common(verify);
  verify->add_option("--seed", seed, "seed for the random instances");
  auto* diagnose = app.add_subcommand("diagnose", "NLL gap and entropy for a finished run");
  add_common(diagnose);
  diagnose->add_option("run_dir", run_dir, "directory written by `run`")->required()->check(CLI::ExistingDirectory);
  diagnose->add_option("--seed", seed, "seed for the diagnostic rollouts");
  diagnose->add_option("--episodes", episodes, "diagnostic episodes per replicate")->check(CLI::PositiveNumber);
  auto* repro = app.add_subcommand("repro-frozenlake", "hca, hca_prior and hca_value on both FrozenLake maps");
  add_common(repro);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(o);
    if (*verify) return cmd_verify(o, seed);
    if (*diagnose) return cmd_diagnose(run_dir, o, seed, episodes);
    if (*repro) return cmd_repro(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
