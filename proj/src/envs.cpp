#include "hca/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hca {

namespace {

struct Tables {
  int S, A;
  std::vector<double> p, r;
  Tables(int s, int a)
      : S(s), A(a), p(static_cast<std::size_t>(s) * a * s, 0.0), r(p.size(), 0.0) {}
  std::size_t at(int s, int a, int n) const {
    return (static_cast<std::size_t>(s) * A + a) * S + n;
  }
  void absorb(int s) {
    for (int a = 0; a < A; ++a) p[at(s, a, s)] = 1.0;
  }
};

}  // namespace

std::vector<std::string> parse_lake_map(const std::string& text) {
  std::vector<std::string> rows;
  std::string cur;
  for (char c : text) {
    if (c == '/' || c == ',') {
      rows.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur.push_back(c);
    }
  }
  rows.push_back(cur);
  return rows;
}

TabularMdp make_frozenlake(const FrozenLakeConfig& config) {
  const auto& map = config.map;
  if (map.empty() || map.front().empty()) throw ConfigError("frozen lake map is empty");
  const int rows = static_cast<int>(map.size());
  const int cols = static_cast<int>(map.front().size());
  int starts = 0, goals = 0, start = 0;
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(map[i].size()) != cols) throw ConfigError("frozen lake map is not rectangular");
    for (int j = 0; j < cols; ++j) {
      switch (map[i][j]) {
        case 'S':
          ++starts;
          start = i * cols + j;
          break;
        case 'G': ++goals; break;
        case 'F':
        case 'H': break;
        default: throw ConfigError(std::string("frozen lake map has invalid cell '") + map[i][j] + "'");
      }
    }
  }
  if (starts != 1) throw ConfigError("frozen lake map needs exactly one S");
  if (goals < 1) throw ConfigError("frozen lake map needs at least one G");

  const int S = rows * cols;
  const int A = 4;
  Tables t(S, A);
  std::vector<bool> terminal(static_cast<std::size_t>(S), false);
  std::vector<double> entry_reward(static_cast<std::size_t>(S), 0.0);
  for (int s = 0; s < S; ++s) {
    const char c = map[s / cols][s % cols];
    terminal[s] = c == 'G' || c == 'H';
    if (c == 'G') entry_reward[s] = config.goal_reward;
    if (c == 'H') entry_reward[s] = config.hole_penalty;
  }
  auto move = [&](int s, int dir) {
    int i = s / cols, j = s % cols;
    switch (dir) {
      case kLeft: j = std::max(j - 1, 0); break;
      case kDown: i = std::min(i + 1, rows - 1); break;
      case kRight: j = std::min(j + 1, cols - 1); break;
      case kUp: i = std::max(i - 1, 0); break;
    }
    return i * cols + j;
  };
  for (int s = 0; s < S; ++s) {
    if (terminal[s]) {
      t.absorb(s);
      continue;
    }
    for (int a = 0; a < A; ++a) {
      if (config.slippery) {
        for (int dir : {(a + 3) % 4, a, (a + 1) % 4}) t.p[t.at(s, a, move(s, dir))] += 1.0 / 3.0;
      } else {
        t.p[t.at(s, a, move(s, a))] = 1.0;
      }
      for (int n = 0; n < S; ++n) t.r[t.at(s, a, n)] = entry_reward[n];
    }
  }
  std::vector<double> initial(static_cast<std::size_t>(S), 0.0);
  initial[start] = 1.0;
  return TabularMdp(S, A, config.gamma, RewardKind::NextStateOnly, std::move(t.p), std::move(t.r),
                    std::move(terminal), std::move(initial));
}

DelayedChainLayout delayed_chain_layout(const DelayedChainConfig& config) {
  DelayedChainLayout layout;
  layout.delay = config.delay;
  layout.stage_size = 3 + 2 * config.delay;
  return layout;
}

TabularMdp make_delayed_chain(const DelayedChainConfig& config) {
  if (config.decision_states < 1) throw ConfigError("delayed chain needs at least one decision state");
  if (config.delay < 0) throw ConfigError("delayed chain delay must be nonnegative");
  if (config.n_actions < 2) throw ConfigError("delayed chain needs at least two actions");
  const auto L = delayed_chain_layout(config);
  const int stages = config.decision_states;
  const int S = stages * L.stage_size;
  const int A = config.n_actions;
  Tables t(S, A);
  std::vector<bool> terminal(static_cast<std::size_t>(S), false);

  auto forced = [&](int from, int to) {
    for (int a = 0; a < A; ++a) t.p[t.at(from, a, to)] = 1.0;
  };
  for (int i = 0; i < stages; ++i) {
    const int d = L.decision(i);
    const int good_entry = config.delay > 0 ? L.good_filler(i, 0) : L.good_outcome(i);
    const int bad_entry = config.delay > 0 ? L.bad_filler(i, 0) : L.bad_outcome(i);
    for (int a = 0; a < A; ++a) t.p[t.at(d, a, a == kRewardedAction ? good_entry : bad_entry)] = 1.0;
    for (int j = 0; j < config.delay; ++j) {
      const bool last = j + 1 == config.delay;
      forced(L.good_filler(i, j), last ? L.good_outcome(i) : L.good_filler(i, j + 1));
      forced(L.bad_filler(i, j), last ? L.bad_outcome(i) : L.bad_filler(i, j + 1));
    }
    if (i + 1 < stages) {
      forced(L.good_outcome(i), L.decision(i + 1));
      forced(L.bad_outcome(i), L.decision(i + 1));
    } else {
      terminal[L.good_outcome(i)] = true;
      terminal[L.bad_outcome(i)] = true;
      t.absorb(L.good_outcome(i));
      t.absorb(L.bad_outcome(i));
    }
  }
  for (int s = 0; s < S; ++s) {
    if (terminal[s]) continue;
    for (int a = 0; a < A; ++a)
      for (int i = 0; i < stages; ++i) t.r[t.at(s, a, L.good_outcome(i))] = 1.0;
  }
  std::vector<double> initial(static_cast<std::size_t>(S), 0.0);
  initial[0] = 1.0;
  return TabularMdp(S, A, config.gamma, RewardKind::NextStateOnly, std::move(t.p), std::move(t.r),
                    std::move(terminal), std::move(initial));
}

TabularMdp make_two_arm(double gamma) {
  return make_delayed_chain(DelayedChainConfig{1, 0, 2, gamma});
}

TabularMdp make_chain(int n_states, int n_actions, double step_reward, double final_reward,
                      double gamma) {
  if (n_states < 2) throw ConfigError("chain needs at least two states");
  if (n_actions < 1) throw ConfigError("chain needs at least one action");
  Tables t(n_states, n_actions);
  std::vector<bool> terminal(static_cast<std::size_t>(n_states), false);
  terminal[n_states - 1] = true;
  for (int s = 0; s + 1 < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      t.p[t.at(s, a, s + 1)] = 1.0;
      for (int n = 0; n < n_states; ++n)
        t.r[t.at(s, a, n)] = n == n_states - 1 ? final_reward : step_reward;
    }
  }
  t.absorb(n_states - 1);
  std::vector<double> initial(static_cast<std::size_t>(n_states), 0.0);
  initial[0] = 1.0;
  return TabularMdp(n_states, n_actions, gamma, RewardKind::NextStateOnly, std::move(t.p),
                    std::move(t.r), std::move(terminal), std::move(initial));
}

TabularMdp make_chain3(double gamma) { return make_chain(3, 2, 0.0, 1.0, gamma); }

TabularMdp make_random_mdp(const RandomMdpConfig& config, Rng& rng) {
  const int S = config.n_states;
  const int A = config.n_actions;
  if (S < 2 || A < 1) throw ConfigError("random MDP needs at least two states and one action");
  if (config.n_terminal < 0 || config.n_terminal >= S)
    throw ConfigError("random MDP terminal count must leave a live state");
  const int k = std::clamp(config.max_successors, 1, S);
  Tables t(S, A);
  std::vector<bool> terminal(static_cast<std::size_t>(S), false);
  for (int s = S - config.n_terminal; s < S; ++s) terminal[s] = true;

  std::vector<int> order(static_cast<std::size_t>(S));
  std::vector<double> entry(static_cast<std::size_t>(S));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& e : entry) e = normal(rng.engine());

  for (int s = 0; s < S; ++s) {
    if (terminal[s]) {
      t.absorb(s);
      continue;
    }
    for (int a = 0; a < A; ++a) {
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng.engine());
      double total = 0.0;
      for (int j = 0; j < k; ++j) {
        const double w = -std::log(1.0 - rng.uniform());  // Exp(1): Dirichlet(1) after normalising
        t.p[t.at(s, a, order[j])] = w;
        total += w;
      }
      for (int n = 0; n < S; ++n) {
        t.p[t.at(s, a, n)] /= total;
        t.r[t.at(s, a, n)] = config.reward_kind == RewardKind::NextStateOnly ? entry[n]
                                                                            : normal(rng.engine());
      }
      // Renormalise so the row sums to 1 to the last ulp.
      double row = 0.0;
      for (int n = 0; n < S; ++n) row += t.p[t.at(s, a, n)];
      t.p[t.at(s, a, order[0])] += 1.0 - row;
    }
  }
  std::vector<double> initial(static_cast<std::size_t>(S), 0.0);
  double total = 0.0;
  for (int s = 0; s < S; ++s) {
    if (terminal[s]) continue;
    initial[s] = rng.uniform() + 0.1;
    total += initial[s];
  }
  for (double& p : initial) p /= total;
  double drift = 1.0;
  for (double p : initial) drift -= p;
  initial[0] += drift;
  return TabularMdp(S, A, config.gamma, config.reward_kind, std::move(t.p), std::move(t.r),
                    std::move(terminal), std::move(initial));
}

}  // namespace hca
