#pragma once

#include <string>
#include <vector>

#include "hca/mdp.hpp"
#include "hca/rng.hpp"

namespace hca {

enum FrozenLakeAction : int { kLeft = 0, kDown = 1, kRight = 2, kUp = 3 };

struct FrozenLakeConfig {
  std::vector<std::string> map = {"SFFF", "FHFH", "FFFH", "HFFG"};
  bool slippery = true;
  double hole_penalty = 0.0;
  double goal_reward = 1.0;
  double gamma = 0.99;
};

/// Parses "SFFF/FHFH/FFFH/HFFG" (rows separated by '/' or ',').
std::vector<std::string> parse_lake_map(const std::string& text);

/// Grid world with the 1/3-intended, 1/3-each-perpendicular slip rule.
/// State index is row * width + col; walls leave the agent in place.
TabularMdp make_frozenlake(const FrozenLakeConfig& config);

/// Decision stages with an action-dependent filler corridor before the payoff.
///
/// Stage i holds a decision state, `delay` good-branch fillers, `delay`
/// bad-branch fillers, a bad outcome and a good outcome (in that order).
/// Action 1 at the decision state enters the good branch, every other action
/// the bad branch. Entering the good outcome pays +1. Outcomes lead to the
/// next stage's decision state, or are terminal in the last stage.
struct DelayedChainConfig {
  int decision_states = 1;
  int delay = 0;
  int n_actions = 2;
  double gamma = 1.0;
};

struct DelayedChainLayout {
  int stage_size = 0;
  int decision(int stage) const { return stage * stage_size; }
  int good_filler(int stage, int j) const { return stage * stage_size + 1 + j; }
  int bad_filler(int stage, int j) const { return stage * stage_size + 1 + delay + j; }
  int bad_outcome(int stage) const { return stage * stage_size + 1 + 2 * delay; }
  int good_outcome(int stage) const { return stage * stage_size + 2 + 2 * delay; }
  int delay = 0;
};

constexpr int kRewardedAction = 1;

DelayedChainLayout delayed_chain_layout(const DelayedChainConfig& config);
TabularMdp make_delayed_chain(const DelayedChainConfig& config);

/// One start state, two actions into two terminals paying 0 and 1.
TabularMdp make_two_arm(double gamma = 1.0);

/// Deterministic corridor 0 → 1 → … → n−1 (terminal), independent of action.
/// Entering an intermediate state pays `step_reward`, the last `final_reward`.
TabularMdp make_chain(int n_states, int n_actions, double step_reward, double final_reward,
                      double gamma);

/// Three-state chain paying +1 on entering the final state.
TabularMdp make_chain3(double gamma = 0.9);

struct RandomMdpConfig {
  int n_states = 8;
  int n_actions = 3;
  int n_terminal = 1;
  double gamma = 0.9;
  RewardKind reward_kind = RewardKind::NextStateOnly;
  int max_successors = 4;  // nonzero entries per transition row
};

TabularMdp make_random_mdp(const RandomMdpConfig& config, Rng& rng);

}  // namespace hca
