#include "hca/hindsight.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hca {

namespace {

// Row-stochastic P_π with transitions out of terminal states removed.
std::vector<double> live_chain(const TabularMdp& mdp, const std::vector<double>& pi) {
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  std::vector<double> chain(static_cast<std::size_t>(S) * S, 0.0);
  for (int x = 0; x < S; ++x) {
    if (mdp.is_terminal(x)) continue;
    for (int b = 0; b < A; ++b) {
      const double w = pi[static_cast<std::size_t>(x) * A + b];
      const auto row = mdp.transition_row(x, b);
      for (int y = 0; y < S; ++y) chain[static_cast<std::size_t>(x) * S + y] += w * row[y];
    }
  }
  return chain;
}

void softmax_into(std::span<double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    total += v;
  }
  for (double& v : z) v /= total;
}

}  // namespace

// ---------------------------------------------------------------------------
// ExactHindsight

std::size_t ExactHindsight::cube(int delta, int s, int a, int future) const {
  return ((static_cast<std::size_t>(delta - 1) * n_states_ + s) * n_actions_ + a) * n_states_ + future;
}

std::size_t ExactHindsight::square(int delta, int s, int future) const {
  return (static_cast<std::size_t>(delta - 1) * n_states_ + s) * n_states_ + future;
}

void ExactHindsight::check_delta(int delta) const {
  if (delta < 1 || delta > delta_max_)
    throw std::out_of_range("hindsight offset " + std::to_string(delta) + " outside 1.." +
                            std::to_string(delta_max_));
}

double ExactHindsight::reach(int delta, int s, int future) const {
  check_delta(delta);
  return reach_[square(delta, s, future)];
}

double ExactHindsight::reach_given_action(int delta, int s, int a, int future) const {
  check_delta(delta);
  return reach_action_[cube(delta, s, a, future)];
}

std::span<const double> ExactHindsight::probs(int delta, int s, int future) const {
  if (!defined(delta, s, future))
    throw UnreachablePairError("hindsight undefined: state " + std::to_string(future) +
                               " is unreachable " + std::to_string(delta) + " steps after state " +
                               std::to_string(s));
  return {h_.data() + square(delta, s, future) * n_actions_, static_cast<std::size_t>(n_actions_)};
}

ExactHindsight exact_hindsight(const TabularMdp& mdp, const PolicyTable& policy, int delta_max) {
  policy.check_matches(mdp);
  if (delta_max < 1) throw ConfigError("exact_hindsight: delta_max must be at least 1");
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  ExactHindsight out;
  out.delta_max_ = delta_max;
  out.n_states_ = S;
  out.n_actions_ = A;
  out.pi_ = policy.probability_table();
  const std::size_t D = static_cast<std::size_t>(delta_max);
  out.reach_action_.assign(D * S * A * S, 0.0);
  out.reach_.assign(D * S * S, 0.0);
  out.h_.assign(D * S * S * A, 0.0);
  const std::vector<double> chain = live_chain(mdp, out.pi_);

#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < S; ++s) {
    if (mdp.is_terminal(s)) continue;
    for (int a = 0; a < A; ++a) {
      const auto row = mdp.transition_row(s, a);
      std::copy(row.begin(), row.end(), out.reach_action_.begin() + static_cast<std::ptrdiff_t>(out.cube(1, s, a, 0)));
      for (int d = 2; d <= delta_max; ++d) {
        const double* prev = out.reach_action_.data() + out.cube(d - 1, s, a, 0);
        double* cur = out.reach_action_.data() + out.cube(d, s, a, 0);
        for (int x = 0; x < S; ++x) {
          if (prev[x] == 0.0) continue;
          const double* crow = chain.data() + static_cast<std::size_t>(x) * S;
          for (int y = 0; y < S; ++y) cur[y] += prev[x] * crow[y];
        }
      }
    }
    const double* pi = out.pi_.data() + static_cast<std::size_t>(s) * A;
    for (int d = 1; d <= delta_max; ++d) {
      for (int y = 0; y < S; ++y) {
        double total = 0.0;
        for (int a = 0; a < A; ++a) total += pi[a] * out.reach_action_[out.cube(d, s, a, y)];
        out.reach_[out.square(d, s, y)] = total;
        if (total <= 0.0) continue;
        double* h = out.h_.data() + out.square(d, s, y) * A;
        for (int a = 0; a < A; ++a) h[a] = pi[a] * out.reach_action_[out.cube(d, s, a, y)] / total;
      }
    }
  }
  return out;
}

int hindsight_horizon(const TabularMdp& mdp, const PolicyTable& policy, double tol, int cap) {
  const int S = mdp.n_states();
  const auto pi = policy.probability_table();
  const auto chain = live_chain(mdp, pi);
  const double rmax = std::max(mdp.max_abs_reward(), 1e-300);
  const double g = mdp.gamma();
  const double tail_factor = g < 1.0 ? 1.0 / (1.0 - g) : 1.0;
  // Worst-case live mass over start states, propagated as a vector per start.
  std::vector<double> mass(static_cast<std::size_t>(S) * S, 0.0), next(mass.size());
  for (int s = 0; s < S; ++s)
    if (!mdp.is_terminal(s)) mass[static_cast<std::size_t>(s) * S + s] = 1.0;
  double discount = 1.0;
  for (int d = 1; d <= cap; ++d) {
    std::fill(next.begin(), next.end(), 0.0);
    double worst = 0.0;
    for (int s = 0; s < S; ++s) {
      const double* m = mass.data() + static_cast<std::size_t>(s) * S;
      double* n = next.data() + static_cast<std::size_t>(s) * S;
      for (int x = 0; x < S; ++x) {
        if (m[x] == 0.0) continue;
        const double* crow = chain.data() + static_cast<std::size_t>(x) * S;
        for (int y = 0; y < S; ++y) n[y] += m[x] * crow[y];
      }
      double live = 0.0;
      for (int y = 0; y < S; ++y)
        if (!mdp.is_terminal(y)) live += n[y];
      worst = std::max(worst, live);
    }
    mass.swap(next);
    discount *= g;
    // Rewards at offsets > d need a live state at offset d.
    if (discount * worst * rmax * tail_factor < tol) return d + 1;
    for (int s = 0; s < S; ++s)
      for (int y = 0; y < S; ++y)
        if (mdp.is_terminal(y)) mass[static_cast<std::size_t>(s) * S + y] = 0.0;
  }
  return cap;
}

// ---------------------------------------------------------------------------
// TransitionHindsight

double TransitionHindsight::occupancy(int delta, int s, int a, int x) const {
  return occupancy_[((static_cast<std::size_t>(delta - 1) * n_states_ + s) * n_actions_ + a) * n_states_ + x];
}

double TransitionHindsight::joint_given_action(int delta, int s, int a, int x, int b, int y) const {
  if (delta < 0 || delta > delta_max_)
    throw std::out_of_range("transition hindsight offset " + std::to_string(delta) +
                            " outside 0.." + std::to_string(delta_max_));
  if (terminal_[s]) return 0.0;
  const double step = transition_[(static_cast<std::size_t>(x) * n_actions_ + b) * n_states_ + y];
  if (delta == 0) return (x == s && b == a) ? step : 0.0;
  if (terminal_[x]) return 0.0;
  return occupancy(delta, s, a, x) * pi_[static_cast<std::size_t>(x) * n_actions_ + b] * step;
}

double TransitionHindsight::joint(int delta, int s, int x, int b, int y) const {
  double total = 0.0;
  for (int a = 0; a < n_actions_; ++a)
    total += pi_[static_cast<std::size_t>(s) * n_actions_ + a] * joint_given_action(delta, s, a, x, b, y);
  return total;
}

void TransitionHindsight::probs(int delta, int s, int x, int b, int y, std::span<double> out) const {
  double total = 0.0;
  for (int a = 0; a < n_actions_; ++a) {
    out[a] = pi_[static_cast<std::size_t>(s) * n_actions_ + a] * joint_given_action(delta, s, a, x, b, y);
    total += out[a];
  }
  if (!(total > 0.0))
    throw UnreachablePairError("transition hindsight undefined for (s=" + std::to_string(s) +
                               ", x=" + std::to_string(x) + ", b=" + std::to_string(b) +
                               ", y=" + std::to_string(y) + ") at offset " + std::to_string(delta));
  for (int a = 0; a < n_actions_; ++a) out[a] /= total;
}

std::vector<double> TransitionHindsight::probs(int delta, int s, int x, int b, int y) const {
  std::vector<double> out(static_cast<std::size_t>(n_actions_));
  probs(delta, s, x, b, y, out);
  return out;
}

TransitionHindsight exact_transition_hindsight(const TabularMdp& mdp, const PolicyTable& policy,
                                               int delta_max) {
  policy.check_matches(mdp);
  if (delta_max < 0) throw ConfigError("exact_transition_hindsight: delta_max must be nonnegative");
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  TransitionHindsight out;
  out.delta_max_ = delta_max;
  out.n_states_ = S;
  out.n_actions_ = A;
  out.pi_ = policy.probability_table();
  out.transition_ = mdp.transition();
  out.terminal_ = mdp.terminal();
  if (delta_max == 0) return out;
  // Occupancy of live, non-terminal x at offset Δ ≥ 1 given (s, a).
  const ExactHindsight state_oracle = exact_hindsight(mdp, policy, delta_max);
  out.occupancy_.assign(static_cast<std::size_t>(delta_max) * S * A * S, 0.0);
  for (int d = 1; d <= delta_max; ++d)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a)
        for (int x = 0; x < S; ++x)
          if (!mdp.is_terminal(x))
            out.occupancy_[((static_cast<std::size_t>(d - 1) * S + s) * A + a) * S + x] =
                state_oracle.reach_given_action(d, s, a, x);
  return out;
}

// ---------------------------------------------------------------------------
// CreditModel

CreditModel::CreditModel(int n_states, int n_actions, CreditParametrization parametrization)
    : n_states_(n_states),
      n_actions_(n_actions),
      parametrization_(parametrization),
      g_(static_cast<std::size_t>(n_states) * n_states * n_actions, 0.0) {
  if (n_states < 1 || n_actions < 1) throw ConfigError("credit model needs positive dimensions");
}

void CreditModel::check_matches(const PolicyTable& policy) const {
  if (policy.n_states() != n_states_ || policy.n_actions() != n_actions_)
    throw ConfigError("credit model dimensions do not match policy");
}

void credit_prob(const CreditModel& model, const PolicyTable& policy, int s_t, int s_k,
                 std::span<double> out) {
  const int A = model.n_actions();
  const auto g = model.residual(s_t, s_k);
  if (model.parametrization() == CreditParametrization::Plain) {
    std::copy(g.begin(), g.end(), out.begin());
  } else {
    const auto z = policy.row(s_t);
    // log π(a|s) = z_a − logsumexp(z); the shared constant drops out of the softmax.
    for (int a = 0; a < A; ++a) out[a] = g[a] + z[a];
  }
  softmax_into(out.first(static_cast<std::size_t>(A)));
}

std::vector<double> credit_prob(const CreditModel& model, const PolicyTable& policy, int s_t,
                                int s_k) {
  std::vector<double> out(static_cast<std::size_t>(model.n_actions()));
  credit_prob(model, policy, s_t, s_k, out);
  return out;
}

double credit_nll(const CreditModel& model, const PolicyTable& policy,
                  std::span<const CreditSample> batch) {
  if (batch.empty()) throw ConfigError("credit batch is empty");
  std::vector<double> h(static_cast<std::size_t>(model.n_actions()));
  double nll = 0.0;
  for (const auto& x : batch) {
    credit_prob(model, policy, x.state, x.future, h);
    nll -= std::log(h[x.action]);
  }
  return nll / static_cast<double>(batch.size());
}

std::vector<double> credit_gradient(const CreditModel& model, const PolicyTable& policy,
                                    std::span<const CreditSample> batch) {
  if (batch.empty()) throw ConfigError("credit batch is empty");
  const int A = model.n_actions();
  std::vector<double> grad(model.residuals().size(), 0.0);
  std::vector<double> h(static_cast<std::size_t>(A));
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const auto& x : batch) {
    credit_prob(model, policy, x.state, x.future, h);
    double* row = grad.data() + (static_cast<std::size_t>(x.state) * model.n_states() + x.future) * A;
    for (int a = 0; a < A; ++a) row[a] += scale * (h[a] - (a == x.action ? 1.0 : 0.0));
  }
  return grad;
}

double train_credit_model(CreditModel& model, const PolicyTable& policy,
                          std::span<const CreditSample> batch, double lr) {
  model.check_matches(policy);
  if (batch.empty()) throw ConfigError("train_credit_model: batch is empty");
  if (!(lr > 0.0)) throw ConfigError("train_credit_model: lr must be positive");
  const int A = model.n_actions();
  const int S = model.n_states();
  // Gradients are accumulated per touched row against the pre-step residuals.
  std::vector<std::size_t> rows;
  rows.reserve(batch.size());
  for (const auto& x : batch) {
    if (x.state < 0 || x.state >= S || x.future < 0 || x.future >= S || x.action < 0 || x.action >= A)
      throw ConfigError("train_credit_model: sample index out of range");
    rows.push_back(static_cast<std::size_t>(x.state) * S + x.future);
  }
  std::vector<std::size_t> unique_rows = rows;
  std::sort(unique_rows.begin(), unique_rows.end());
  unique_rows.erase(std::unique(unique_rows.begin(), unique_rows.end()), unique_rows.end());

  std::vector<double> h(unique_rows.size() * A), grad(unique_rows.size() * A, 0.0);
  for (std::size_t i = 0; i < unique_rows.size(); ++i) {
    const int s = static_cast<int>(unique_rows[i] / S);
    const int f = static_cast<int>(unique_rows[i] % S);
    credit_prob(model, policy, s, f, std::span<double>(h.data() + i * A, static_cast<std::size_t>(A)));
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  double nll = 0.0;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const std::size_t i = static_cast<std::size_t>(
        std::lower_bound(unique_rows.begin(), unique_rows.end(), rows[j]) - unique_rows.begin());
    const double* hr = h.data() + i * A;
    nll -= std::log(hr[batch[j].action]);
    for (int a = 0; a < A; ++a) grad[i * A + a] += scale * (hr[a] - (a == batch[j].action ? 1.0 : 0.0));
  }
  auto& g = model.residuals();
  for (std::size_t i = 0; i < unique_rows.size(); ++i)
    for (int a = 0; a < A; ++a) g[unique_rows[i] * A + a] -= lr * grad[i * A + a];
  return nll * scale;
}

void clip_credit(std::span<const double> h, std::span<const double> pi, double lambda,
                 std::span<double> out) {
  if (!(lambda > 0.0)) throw ConfigError("clip_credit: lambda must be positive");
  for (std::size_t a = 0; a < h.size(); ++a) out[a] = std::min(h[a], lambda * pi[a]);
}

std::vector<double> clip_credit(std::span<const double> h, std::span<const double> pi,
                                double lambda) {
  std::vector<double> out(h.size());
  clip_credit(h, pi, lambda, out);
  return out;
}

}  // namespace hca
