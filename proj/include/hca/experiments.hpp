#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hca/diagnostics.hpp"
#include "hca/harness.hpp"
#include "hca/montecarlo.hpp"
#include "hca/verify.hpp"

namespace hca {

// Negative-return collapse on an action-irrelevant corridor where every step
// costs `step_reward` < 0. Credit is a fixed, future-independent c(a|s).
struct CollapseConfig {
  int chain_length = 6;
  int n_actions = 3;
  double step_reward = -1.0;
  double gamma = 0.9;
  int iterations = 3000;           // one episode per iteration
  double lr_policy = 0.1;
  double lr_value = 0.5;
  double lr_reward = 0.5;
  double max_grad_norm = 0.5;
};

struct CollapseRun {
  std::vector<double> entropy;     // mean entropy over states 0..n-3 (those with a reward after the next), per iteration
  double final_entropy = 0.0;
  double min_entropy = 0.0;
  bool argmax_is_argmin_credit = false;  // on every scored state
};

/// `use_value` false: hca_update with a learned r̂. True: hca_value_update with
/// a learned V. Both start from the uniform policy.
CollapseRun run_collapse(const CollapseConfig& config, bool use_value, std::uint64_t seed);

// Credit trained on DelayedChain rollouts under the uniform policy, then
// scored by its NLL gap at decision states on fresh rollouts.
struct NllGapExperimentConfig {
  int delay = 5;
  int decision_states = 4;
  int n_actions = 2;
  int segment_length = 32;
  int train_episodes = 4000;
  int eval_episodes = 1000;
  double lr_credit = 0.5;
  int delta_max = 20;
};

NllGapCurve run_nll_gap_experiment(const NllGapExperimentConfig& config, std::uint64_t seed);

// Sample-mean updates against the exact gradient.
struct UnbiasednessReport {
  std::string label;
  McComparison comparison;
  long long episodes = 0;
};

/// REINFORCE on whole episodes, A2C with exact V and HCA-Value with exact
/// transition credit and exact V on T-step segments, each compared with k·SE.
std::vector<UnbiasednessReport> check_unbiasedness(const TabularMdp& mdp, const PolicyTable& policy,
                                                   long long episodes, int segment_length,
                                                   std::uint64_t seed, double k = 3.0);

// FrozenLake comparison of hca, hca_prior and hca_value on the standard and
// penalty maps.
struct FrozenLakeComparison {
  Summary standard;
  Summary penalty;
  std::vector<CheckResult> claims;
};

/// `base` supplies everything except env, algorithm, replicates and budget.
/// When `out_dir` is non-empty, every run and both summaries are written there.
FrozenLakeComparison compare_frozenlake(const ExperimentConfig& base, int seeds, long long steps,
                                        const std::filesystem::path& out_dir = {});

/// Ordinal checks: value > prior > hca by 2 pooled SE each on the standard map;
/// prior ≤ 0.05 and value within 2 pooled SE of its standard result on the penalty map.
std::vector<CheckResult> frozenlake_claims(const Summary& standard, const Summary& penalty);

}  // namespace hca
