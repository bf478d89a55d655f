#include "hca/agents.hpp"

#include <cmath>

namespace hca {

namespace {

int position_state(const Trajectory& seg, std::size_t j) {
  return j < seg.steps.size() ? seg.steps[j].state : seg.steps.back().next_state;
}

double bootstrap_value(const Trajectory& seg, const ValueTable* value) {
  if (value == nullptr || seg.empty() || seg.steps.back().terminal) return 0.0;
  return (*value)[seg.steps.back().next_state];
}

// grad[s][b] += scale (G_b − π_b Σ_a G_a): the counterfactual score-function sum.
void accumulate_counterfactual(UpdateEstimate& out, int s, const double* pi,
                               const std::vector<double>& g, double scale) {
  const int A = out.n_actions;
  double total = 0.0;
  for (int a = 0; a < A; ++a) total += g[a];
  for (int b = 0; b < A; ++b) out.at(s, b) += scale * (g[b] - pi[b] * total);
  out.weight[s] += 1.0;
}

void accumulate_sampled(UpdateEstimate& out, int s, int a, const double* pi, double weight,
                        double scale) {
  const int A = out.n_actions;
  for (int b = 0; b < A; ++b) out.at(s, b) += scale * ((b == a ? 1.0 : 0.0) - pi[b]) * weight;
  out.weight[s] += 1.0;
}

void require_nonempty(const RolloutBatch& batch, const char* who) {
  if (batch.empty()) throw ConfigError(std::string(who) + ": batch is empty");
}

// Shared body of the Eq.-4-style estimators: Σ_k γ^{k−t} C(a|S_t,S_{k+1}) x_k.
template <class RewardFn>
UpdateEstimate next_state_credit_update(const RolloutBatch& batch, const PolicyTable& policy,
                                        const CreditFunction& credit, double gamma,
                                        RewardFn&& reward_of) {
  const int S = policy.n_states();
  const int A = policy.n_actions();
  const auto pi = policy.probability_table();
  UpdateEstimate out(S, A);
  std::vector<double> g(static_cast<std::size_t>(A)), c(static_cast<std::size_t>(A));
  for (const Trajectory& seg : batch.segments) {
    const std::size_t L = seg.steps.size();
    std::vector<double> x(L);
    for (std::size_t k = 0; k < L; ++k) x[k] = reward_of(seg.steps[k]);
    for (std::size_t t = 0; t < L; ++t) {
      const Step& st = seg.steps[t];
      const double* pt = pi.data() + static_cast<std::size_t>(st.state) * A;
      std::fill(g.begin(), g.end(), 0.0);
      double discount = 1.0;
      for (std::size_t k = t; k < L; ++k, discount *= gamma) {
        if (x[k] == 0.0) continue;
        const Step& sk = seg.steps[k];
        CreditQuery q{st.state, st.action, sk.next_state, static_cast<int>(k + 1 - t), true,
                      sk.state, sk.action};
        credit_weights(credit, q, {pt, static_cast<std::size_t>(A)}, c);
        for (int a = 0; a < A; ++a) g[a] += discount * c[a] * x[k];
      }
      accumulate_counterfactual(out, st.state, pt, g, std::pow(gamma, seg.start_time + static_cast<double>(t)));
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Batches

bool RolloutBatch::empty() const noexcept { return total_steps() == 0; }

std::size_t RolloutBatch::total_steps() const noexcept {
  std::size_t n = 0;
  for (const auto& s : segments) n += s.steps.size();
  return n;
}

void RolloutBatch::validate() const {
  for (const auto& s : segments) s.validate();
}

std::optional<int> bootstrap_state(const Trajectory& segment) {
  if (segment.empty() || segment.steps.back().terminal) return std::nullopt;
  return segment.steps.back().next_state;
}

RolloutBatch split_into_segments(const Trajectory& episode, int segment_length) {
  if (segment_length < 1) throw ConfigError("segment length must be positive");
  RolloutBatch batch;
  const std::size_t T = static_cast<std::size_t>(segment_length);
  for (std::size_t begin = 0; begin < episode.steps.size(); begin += T) {
    const std::size_t end = std::min(begin + T, episode.steps.size());
    Trajectory seg;
    seg.start_time = episode.start_time + static_cast<int>(begin);
    seg.steps.assign(episode.steps.begin() + static_cast<std::ptrdiff_t>(begin),
                     episode.steps.begin() + static_cast<std::ptrdiff_t>(end));
    seg.truncated = !seg.steps.back().terminal;
    batch.segments.push_back(std::move(seg));
  }
  return batch;
}

RolloutSampler::RolloutSampler(const TabularMdp& mdp, int max_episode_steps)
    : mdp_(&mdp), max_episode_steps_(max_episode_steps) {
  if (max_episode_steps < 1) throw ConfigError("max_episode_steps must be positive");
}

void RolloutSampler::reset(Rng& rng) {
  state_ = rng.categorical(mdp_->initial_dist());
  episode_time_ = 0;
}

RolloutBatch RolloutSampler::collect(const PolicyTable& policy, Rng& rng, int n_steps) {
  policy.check_matches(*mdp_);
  RolloutBatch batch;
  std::vector<double> pi(static_cast<std::size_t>(mdp_->n_actions()));
  Trajectory seg;
  auto flush = [&](bool truncated) {
    if (!seg.steps.empty()) {
      seg.truncated = truncated;
      batch.segments.push_back(std::move(seg));
    }
    seg = Trajectory{};
  };
  for (int i = 0; i < n_steps; ++i) {
    if (state_ < 0 || mdp_->is_terminal(state_)) reset(rng);
    if (seg.steps.empty()) seg.start_time = episode_time_;
    policy.probs(state_, pi);
    const int a = rng.categorical(pi);
    const int next = rng.categorical(mdp_->transition_row(state_, a));
    const bool term = mdp_->is_terminal(next);
    seg.steps.push_back(Step{state_, a, mdp_->r(state_, a, next), next, term});
    ++episode_time_;
    state_ = next;
    if (term) {
      ++episodes_finished_;
      flush(false);
      state_ = -1;
    } else if (episode_time_ >= max_episode_steps_) {
      ++episodes_finished_;
      flush(true);
      state_ = -1;
    }
  }
  flush(true);
  return batch;
}

// ---------------------------------------------------------------------------
// Update rules

double augmented_reward(const ValueTable& value, int s, double r, int s_next, double gamma,
                        bool terminal) {
  return (terminal ? 0.0 : gamma * value[s_next]) + r - value[s];
}

UpdateEstimate reinforce_update(const RolloutBatch& batch, const PolicyTable& policy, double gamma,
                                const ValueTable* value) {
  require_nonempty(batch, "reinforce_update");
  const int A = policy.n_actions();
  const auto pi = policy.probability_table();
  UpdateEstimate out(policy.n_states(), A);
  for (const Trajectory& seg : batch.segments) {
    double g = bootstrap_value(seg, value);
    for (std::size_t t = seg.steps.size(); t-- > 0;) {
      const Step& st = seg.steps[t];
      g = st.reward + gamma * g;
      accumulate_sampled(out, st.state, st.action, pi.data() + static_cast<std::size_t>(st.state) * A, g,
                         std::pow(gamma, seg.start_time + static_cast<double>(t)));
    }
  }
  return out;
}

UpdateEstimate a2c_update(const RolloutBatch& batch, const PolicyTable& policy,
                          const ValueTable& value, double gamma, double entropy_coef) {
  require_nonempty(batch, "a2c_update");
  const int A = policy.n_actions();
  const auto pi = policy.probability_table();
  UpdateEstimate out(policy.n_states(), A);
  for (const Trajectory& seg : batch.segments) {
    double g = bootstrap_value(seg, &value);
    for (std::size_t t = seg.steps.size(); t-- > 0;) {
      const Step& st = seg.steps[t];
      g = st.reward + gamma * g;
      accumulate_sampled(out, st.state, st.action, pi.data() + static_cast<std::size_t>(st.state) * A,
                         g - value[st.state], std::pow(gamma, seg.start_time + static_cast<double>(t)));
    }
  }
  if (entropy_coef != 0.0) add_entropy_bonus(out, batch, policy, entropy_coef);
  return out;
}

UpdateEstimate n_step_a2c_update(const RolloutBatch& batch, const PolicyTable& policy,
                                 const ValueTable& value, double gamma, int n) {
  require_nonempty(batch, "n_step_a2c_update");
  if (n < 1) throw ConfigError("n_step_a2c_update: n must be positive");
  const int A = policy.n_actions();
  const auto pi = policy.probability_table();
  UpdateEstimate out(policy.n_states(), A);
  for (const Trajectory& seg : batch.segments) {
    const std::size_t L = seg.steps.size();
    for (std::size_t t = 0; t < L; ++t) {
      const std::size_t end = std::min(L, t + static_cast<std::size_t>(n));
      double ret = 0.0, discount = 1.0;
      for (std::size_t k = t; k < end; ++k, discount *= gamma) ret += discount * seg.steps[k].reward;
      const Step& last = seg.steps[end - 1];
      if (!last.terminal) ret += discount * value[last.next_state];
      const Step& st = seg.steps[t];
      accumulate_sampled(out, st.state, st.action, pi.data() + static_cast<std::size_t>(st.state) * A,
                         ret - value[st.state], std::pow(gamma, seg.start_time + static_cast<double>(t)));
    }
  }
  return out;
}

UpdateEstimate hca_update(const RolloutBatch& batch, const PolicyTable& policy,
                          const CreditFunction& credit, const RewardModel& reward_model,
                          const ValueTable* value, double gamma) {
  require_nonempty(batch, "hca_update");
  const int S = policy.n_states();
  const int A = policy.n_actions();
  if (reward_model.n_states != S || reward_model.n_actions != A)
    throw ConfigError("hca_update: reward model dimensions do not match policy");
  const auto pi = policy.probability_table();
  UpdateEstimate out(S, A);
  std::vector<double> g(static_cast<std::size_t>(A)), c(static_cast<std::size_t>(A));
  for (const Trajectory& seg : batch.segments) {
    const std::size_t L = seg.steps.size();
    const auto boot = bootstrap_state(seg);
    for (std::size_t t = 0; t < L; ++t) {
      const Step& st = seg.steps[t];
      const double* pt = pi.data() + static_cast<std::size_t>(st.state) * A;
      const std::span<const double> pi_t(pt, static_cast<std::size_t>(A));
      for (int a = 0; a < A; ++a) g[a] = pt[a] * reward_model(st.state, a);
      double discount = gamma;
      for (std::size_t k = t + 1; k < L; ++k, discount *= gamma) {
        const double r = seg.steps[k].reward;
        if (r == 0.0) continue;
        CreditQuery q{st.state, st.action, seg.steps[k].state, static_cast<int>(k - t)};
        credit_weights(credit, q, pi_t, c);
        for (int a = 0; a < A; ++a) g[a] += discount * c[a] * r;
      }
      if (value != nullptr && boot) {
        const double v = (*value)[*boot];
        if (v != 0.0) {
          CreditQuery q{st.state, st.action, *boot, static_cast<int>(L - t)};
          credit_weights(credit, q, pi_t, c);
          for (int a = 0; a < A; ++a) g[a] += discount * c[a] * v;
        }
      }
      accumulate_counterfactual(out, st.state, pt, g, std::pow(gamma, seg.start_time + static_cast<double>(t)));
    }
  }
  return out;
}

UpdateEstimate deep_hca_update(const RolloutBatch& batch, const PolicyTable& policy,
                               const CreditFunction& credit, double gamma) {
  require_nonempty(batch, "deep_hca_update");
  return next_state_credit_update(batch, policy, credit, gamma,
                                  [](const Step& st) { return st.reward; });
}

UpdateEstimate hca_value_update(const RolloutBatch& batch, const PolicyTable& policy,
                                const ValueTable& value, const CreditFunction& credit,
                                double gamma) {
  require_nonempty(batch, "hca_value_update");
  return next_state_credit_update(batch, policy, credit, gamma, [&](const Step& st) {
    return augmented_reward(value, st.state, st.reward, st.next_state, gamma, st.terminal);
  });
}

void add_entropy_bonus(UpdateEstimate& update, const RolloutBatch& batch, const PolicyTable& policy,
                       double coef) {
  const int A = policy.n_actions();
  const auto pi = policy.probability_table();
  for (const Trajectory& seg : batch.segments) {
    for (const Step& st : seg.steps) {
      const double* p = pi.data() + static_cast<std::size_t>(st.state) * A;
      double h = 0.0;
      for (int a = 0; a < A; ++a) h -= p[a] * std::log(p[a]);
      for (int b = 0; b < A; ++b) update.at(st.state, b) -= coef * p[b] * (std::log(p[b]) + h);
    }
  }
}

// ---------------------------------------------------------------------------
// Learners

double train_value(ValueTable& value, const RolloutBatch& batch, double gamma, double lr) {
  if (!(lr > 0.0)) throw ConfigError("train_value: lr must be positive");
  const int S = value.size();
  std::vector<double> delta_sum(static_cast<std::size_t>(S), 0.0), count(static_cast<std::size_t>(S), 0.0);
  double sq = 0.0;
  std::size_t n = 0;
  for (const Trajectory& seg : batch.segments) {
    double g = bootstrap_value(seg, &value);
    for (std::size_t t = seg.steps.size(); t-- > 0;) {
      const Step& st = seg.steps[t];
      g = st.reward + gamma * g;
      const double residual = g - value[st.state];
      delta_sum[st.state] += residual;
      count[st.state] += 1.0;
      sq += residual * residual;
      ++n;
    }
  }
  for (int s = 0; s < S; ++s)
    if (count[s] > 0.0) value[s] += lr * delta_sum[s] / count[s];
  return n > 0 ? sq / static_cast<double>(n) : 0.0;
}

double train_reward_model(RewardModel& model, const RolloutBatch& batch, double lr) {
  if (!(lr > 0.0)) throw ConfigError("train_reward_model: lr must be positive");
  std::vector<double> delta_sum(model.table.size(), 0.0), count(model.table.size(), 0.0);
  double sq = 0.0;
  std::size_t n = 0;
  for (const Trajectory& seg : batch.segments) {
    for (const Step& st : seg.steps) {
      const std::size_t i = static_cast<std::size_t>(st.state) * model.n_actions + st.action;
      const double residual = st.reward - model.table[i];
      delta_sum[i] += residual;
      count[i] += 1.0;
      sq += residual * residual;
      ++n;
    }
  }
  for (std::size_t i = 0; i < model.table.size(); ++i)
    if (count[i] > 0.0) model.table[i] += lr * delta_sum[i] / count[i];
  return n > 0 ? sq / static_cast<double>(n) : 0.0;
}

void apply_update(PolicyTable& policy, const UpdateEstimate& update, double lr,
                  double max_grad_norm) {
  if (!(lr > 0.0)) throw ConfigError("apply_update: lr must be positive");
  if (update.n_states != policy.n_states() || update.n_actions != policy.n_actions())
    throw ConfigError("apply_update: update shape does not match policy");
  const double norm = update.norm();
  const double scale = (max_grad_norm > 0.0 && norm > max_grad_norm) ? max_grad_norm / norm : 1.0;
  auto& z = policy.logits();
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += lr * scale * update.grad[i];
}

std::vector<CreditSample> collect_credit_samples(const RolloutBatch& batch) {
  std::vector<CreditSample> out;
  for (const Trajectory& seg : batch.segments) {
    const std::size_t L = seg.steps.size();
    for (std::size_t t = 0; t < L; ++t)
      for (std::size_t j = t + 1; j <= L; ++j)
        out.push_back(CreditSample{seg.steps[t].state, seg.steps[t].action, position_state(seg, j)});
  }
  return out;
}

}  // namespace hca
