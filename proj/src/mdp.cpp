#include "hca/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

namespace hca {

namespace {

constexpr double kRowTolerance = 1e-12;

double sum(std::span<const double> xs) { return std::accumulate(xs.begin(), xs.end(), 0.0); }

// P_π and r_π over all states; terminal rows are zeroed so that
// iteration on the live chain stops at episode end.
struct InducedChain {
  int n = 0;
  std::vector<double> p;  // S×S
  std::vector<double> r;  // S
};

InducedChain induced_chain(const TabularMdp& mdp, const PolicyTable& policy) {
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  InducedChain chain{S, std::vector<double>(static_cast<std::size_t>(S) * S, 0.0),
                     std::vector<double>(static_cast<std::size_t>(S), 0.0)};
  std::vector<double> pi(static_cast<std::size_t>(A));
  for (int s = 0; s < S; ++s) {
    if (mdp.is_terminal(s)) continue;
    policy.probs(s, pi);
    double* row = chain.p.data() + static_cast<std::size_t>(s) * S;
    for (int a = 0; a < A; ++a) {
      const auto pr = mdp.transition_row(s, a);
      const auto rr = mdp.reward_row(s, a);
      for (int n = 0; n < S; ++n) {
        if (pr[n] == 0.0) continue;
        chain.r[s] += pi[a] * pr[n] * rr[n];
        if (!mdp.is_terminal(n)) row[n] += pi[a] * pr[n];
      }
    }
  }
  return chain;
}

}  // namespace

std::string to_string(RewardKind kind) {
  return kind == RewardKind::NextStateOnly ? "next_state" : "full_transition";
}

RewardKind reward_kind_from_string(const std::string& text) {
  if (text == "next_state" || text == "NextStateOnly") return RewardKind::NextStateOnly;
  if (text == "full_transition" || text == "FullTransition") return RewardKind::FullTransition;
  throw ConfigError("unknown reward kind '" + text + "'");
}

// ---------------------------------------------------------------------------
// TabularMdp

TabularMdp::TabularMdp(int n_states, int n_actions, double gamma, RewardKind reward_kind,
                       std::vector<double> transition, std::vector<double> reward,
                       std::vector<bool> terminal, std::vector<double> initial_dist)
    : n_states_(n_states),
      n_actions_(n_actions),
      gamma_(gamma),
      reward_kind_(reward_kind),
      transition_(std::move(transition)),
      reward_(std::move(reward)),
      terminal_(std::move(terminal)),
      initial_(std::move(initial_dist)) {
  if (n_states_ < 1 || n_actions_ < 1) throw ConfigError("MDP needs at least one state and action");
  if (!(gamma_ > 0.0 && gamma_ <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  const std::size_t cube = static_cast<std::size_t>(n_states_) * n_actions_ * n_states_;
  if (transition_.size() != cube || reward_.size() != cube)
    throw ConfigError("transition/reward tables must have n_states*n_actions*n_states entries");
  if (terminal_.size() != static_cast<std::size_t>(n_states_) ||
      initial_.size() != static_cast<std::size_t>(n_states_))
    throw ConfigError("terminal flags and initial distribution must have n_states entries");

  for (int s = 0; s < n_states_; ++s) {
    for (int a = 0; a < n_actions_; ++a) {
      const auto row = transition_row(s, a);
      for (double p : row)
        if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("negative or non-finite transition probability");
      for (double r : reward_row(s, a))
        if (!std::isfinite(r)) throw ConfigError("non-finite reward");
      if (std::abs(sum(row) - 1.0) > kRowTolerance)
        throw ConfigError("transition row (" + std::to_string(s) + "," + std::to_string(a) +
                          ") does not sum to 1");
      if (is_terminal(s) && (this->p(s, a, s) != 1.0 || this->r(s, a, s) != 0.0))
        throw ConfigError("terminal state " + std::to_string(s) +
                          " must self-loop with probability 1 and zero reward");
    }
  }
  for (double p : initial_)
    if (!(p >= 0.0)) throw ConfigError("negative initial probability");
  if (std::abs(sum(initial_) - 1.0) > kRowTolerance)
    throw ConfigError("initial distribution does not sum to 1");

  if (reward_kind_ == RewardKind::NextStateOnly) {
    for (int n = 0; n < n_states_; ++n) {
      bool have_ref = false;
      double ref = 0.0;
      for (int s = 0; s < n_states_; ++s) {
        if (is_terminal(s)) continue;
        for (int a = 0; a < n_actions_; ++a) {
          const double v = this->r(s, a, n);
          if (!have_ref) {
            ref = v;
            have_ref = true;
          } else if (std::abs(v - ref) > kRowTolerance) {
            throw ConfigError("NextStateOnly MDP has reward depending on (s, a) for s' = " +
                              std::to_string(n));
          }
        }
      }
    }
  }
}

double TabularMdp::expected_reward(int s, int a) const {
  const auto pr = transition_row(s, a);
  const auto rr = reward_row(s, a);
  double acc = 0.0;
  for (int n = 0; n < n_states_; ++n) acc += pr[n] * rr[n];
  return acc;
}

double TabularMdp::max_abs_reward() const {
  double m = 0.0;
  for (double r : reward_) m = std::max(m, std::abs(r));
  return m;
}

TabularMdp TabularMdp::with_gamma(double gamma) const {
  return TabularMdp(n_states_, n_actions_, gamma, reward_kind_, transition_, reward_, terminal_,
                    initial_);
}

// ---------------------------------------------------------------------------
// PolicyTable

PolicyTable::PolicyTable(int n_states, int n_actions)
    : PolicyTable(n_states, n_actions,
                  std::vector<double>(static_cast<std::size_t>(n_states) * n_actions, 0.0)) {}

PolicyTable::PolicyTable(int n_states, int n_actions, std::vector<double> logits)
    : n_states_(n_states), n_actions_(n_actions), logits_(std::move(logits)) {
  if (n_states_ < 1 || n_actions_ < 1) throw ConfigError("policy needs at least one state and action");
  if (logits_.size() != static_cast<std::size_t>(n_states_) * n_actions_)
    throw ConfigError("policy logits must have n_states*n_actions entries");
}

void PolicyTable::probs(int s, std::span<double> out) const {
  const auto z = row(s);
  const double m = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (int a = 0; a < n_actions_; ++a) {
    out[a] = std::exp(z[a] - m);
    total += out[a];
  }
  for (int a = 0; a < n_actions_; ++a) out[a] /= total;
}

std::vector<double> PolicyTable::probs(int s) const {
  std::vector<double> out(static_cast<std::size_t>(n_actions_));
  probs(s, out);
  return out;
}

std::vector<double> PolicyTable::probability_table() const {
  std::vector<double> out(logits_.size());
  for (int s = 0; s < n_states_; ++s)
    probs(s, std::span<double>(out.data() + flat(s, 0), static_cast<std::size_t>(n_actions_)));
  return out;
}

void PolicyTable::check_matches(const TabularMdp& mdp) const {
  if (mdp.n_states() != n_states_ || mdp.n_actions() != n_actions_)
    throw ConfigError("policy dimensions (" + std::to_string(n_states_) + "x" +
                      std::to_string(n_actions_) + ") do not match MDP (" +
                      std::to_string(mdp.n_states()) + "x" + std::to_string(mdp.n_actions()) + ")");
}

// ---------------------------------------------------------------------------
// UpdateEstimate

UpdateEstimate::UpdateEstimate(int s, int a)
    : n_states(s),
      n_actions(a),
      grad(static_cast<std::size_t>(s) * a, 0.0),
      weight(static_cast<std::size_t>(s), 0.0) {}

UpdateEstimate& UpdateEstimate::operator+=(const UpdateEstimate& other) {
  if (other.n_states != n_states || other.n_actions != n_actions)
    throw ConfigError("cannot add update estimates of different shapes");
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += other.grad[i];
  for (std::size_t i = 0; i < weight.size(); ++i) weight[i] += other.weight[i];
  return *this;
}

UpdateEstimate& UpdateEstimate::operator*=(double scale) {
  for (double& g : grad) g *= scale;
  return *this;
}

double UpdateEstimate::norm() const {
  double acc = 0.0;
  for (double g : grad) acc += g * g;
  return std::sqrt(acc);
}

double UpdateEstimate::total_weight() const {
  return std::accumulate(weight.begin(), weight.end(), 0.0);
}

double max_abs_diff(const UpdateEstimate& a, const UpdateEstimate& b) {
  if (a.n_states != b.n_states || a.n_actions != b.n_actions)
    throw ConfigError("update estimates have different shapes");
  double m = 0.0;
  for (std::size_t i = 0; i < a.grad.size(); ++i) m = std::max(m, std::abs(a.grad[i] - b.grad[i]));
  return m;
}

// ---------------------------------------------------------------------------
// Trajectories

double Trajectory::total_reward() const {
  double acc = 0.0;
  for (const Step& st : steps) acc += st.reward;
  return acc;
}

void Trajectory::validate() const {
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (k + 1 < steps.size()) {
      if (steps[k].terminal) throw ConfigError("trajectory continues past a terminal step");
      if (steps[k].next_state != steps[k + 1].state)
        throw ConfigError("trajectory steps do not chain at index " + std::to_string(k));
    }
  }
  if (truncated && !steps.empty() && steps.back().terminal)
    throw ConfigError("trajectory is flagged truncated but ends at a terminal step");
}

Trajectory sample_trajectory_from(const TabularMdp& mdp, const PolicyTable& policy, Rng& rng,
                                  int start_state, int max_steps) {
  policy.check_matches(mdp);
  if (max_steps < 1) throw ConfigError("max_steps must be at least 1");
  Trajectory traj;
  traj.steps.reserve(static_cast<std::size_t>(std::min(max_steps, 256)));
  std::vector<double> pi(static_cast<std::size_t>(mdp.n_actions()));
  int s = start_state;
  while (static_cast<int>(traj.steps.size()) < max_steps && !mdp.is_terminal(s)) {
    policy.probs(s, pi);
    const int a = rng.categorical(pi);
    const int next = rng.categorical(mdp.transition_row(s, a));
    const bool term = mdp.is_terminal(next);
    traj.steps.push_back(Step{s, a, mdp.r(s, a, next), next, term});
    s = next;
  }
  traj.truncated = !traj.steps.empty() && !traj.steps.back().terminal;
  return traj;
}

Trajectory sample_trajectory(const TabularMdp& mdp, const PolicyTable& policy, Rng& rng,
                             int max_steps) {
  const int start = rng.categorical(mdp.initial_dist());
  return sample_trajectory_from(mdp, policy, rng, start, max_steps);
}

double discounted_return(const Trajectory& traj, std::size_t t, double gamma) {
  if (t >= traj.steps.size())
    throw std::out_of_range("discounted_return: index " + std::to_string(t) +
                            " out of range for trajectory of length " +
                            std::to_string(traj.steps.size()));
  double g = 0.0;
  for (std::size_t k = traj.steps.size(); k-- > t;) g = traj.steps[k].reward + gamma * g;
  return g;
}

// ---------------------------------------------------------------------------
// Evaluation

ValueTable evaluate_policy(const TabularMdp& mdp, const PolicyTable& policy, double tol) {
  return evaluate_policy(mdp, policy, PolicyEvaluationOptions{tol});
}

ValueTable evaluate_policy(const TabularMdp& mdp, const PolicyTable& policy,
                           const PolicyEvaluationOptions& options) {
  policy.check_matches(mdp);
  if (!(options.tol > 0.0)) throw ConfigError("evaluate_policy: tol must be positive");
  const InducedChain chain = induced_chain(mdp, policy);
  const int S = chain.n;
  const double gamma = mdp.gamma();
  std::vector<double> v(static_cast<std::size_t>(S), 0.0), next(v.size(), 0.0);
  double delta = std::numeric_limits<double>::infinity();
  for (int it = 0; it < options.max_iterations; ++it) {
    delta = 0.0;
#pragma omp parallel for reduction(max : delta) schedule(static)
    for (int s = 0; s < S; ++s) {
      const double* row = chain.p.data() + static_cast<std::size_t>(s) * S;
      double acc = 0.0;
      for (int n = 0; n < S; ++n) acc += row[n] * v[n];
      next[s] = chain.r[s] + gamma * acc;
      delta = std::max(delta, std::abs(next[s] - v[s]));
    }
    v.swap(next);
    if (delta < options.tol) return ValueTable(std::move(v));
  }
  throw NumericalError("evaluate_policy did not converge; last sweep change " +
                           std::to_string(delta),
                       delta);
}

ValueTable solve_policy_values(const TabularMdp& mdp, const PolicyTable& policy) {
  policy.check_matches(mdp);
  const InducedChain chain = induced_chain(mdp, policy);
  const int S = chain.n;
  std::vector<int> live;
  for (int s = 0; s < S; ++s)
    if (!mdp.is_terminal(s)) live.push_back(s);
  const int n = static_cast<int>(live.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    b(i) = chain.r[live[i]];
    for (int j = 0; j < n; ++j)
      a(i, j) -= mdp.gamma() * chain.p[static_cast<std::size_t>(live[i]) * S + live[j]];
  }
  const Eigen::VectorXd x = a.fullPivLu().solve(b);
  ValueTable v(S);
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(x(i)))
      throw NumericalError("policy value system is singular (episodes may never end)",
                           std::numeric_limits<double>::infinity());
    v[live[i]] = x(i);
  }
  const double residual = (a * x - b).cwiseAbs().maxCoeff();
  if (n > 0 && residual > 1e-8 * std::max(1.0, b.cwiseAbs().maxCoeff()))
    throw NumericalError("policy value system is singular (episodes may never end)", residual);
  return v;
}

std::vector<double> action_values(const TabularMdp& mdp, const ValueTable& values) {
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  std::vector<double> q(static_cast<std::size_t>(S) * A, 0.0);
  for (int s = 0; s < S; ++s) {
    if (mdp.is_terminal(s)) continue;
    for (int a = 0; a < A; ++a) {
      const auto pr = mdp.transition_row(s, a);
      const auto rr = mdp.reward_row(s, a);
      double acc = 0.0;
      for (int n = 0; n < S; ++n) {
        if (pr[n] == 0.0) continue;
        acc += pr[n] * (rr[n] + (mdp.is_terminal(n) ? 0.0 : mdp.gamma() * values[n]));
      }
      q[static_cast<std::size_t>(s) * A + a] = acc;
    }
  }
  return q;
}

double bellman_residual(const TabularMdp& mdp, const PolicyTable& policy,
                        const ValueTable& values) {
  const auto q = action_values(mdp, values);
  double worst = 0.0;
  std::vector<double> pi(static_cast<std::size_t>(mdp.n_actions()));
  for (int s = 0; s < mdp.n_states(); ++s) {
    if (mdp.is_terminal(s)) continue;
    policy.probs(s, pi);
    double backup = 0.0;
    for (int a = 0; a < mdp.n_actions(); ++a)
      backup += pi[a] * q[static_cast<std::size_t>(s) * mdp.n_actions() + a];
    worst = std::max(worst, std::abs(backup - values[s]));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Exact gradient

int default_gradient_horizon(const TabularMdp& mdp, double tol, int cap) {
  const double gamma = mdp.gamma();
  const double rmax = mdp.max_abs_reward();
  if (rmax == 0.0) return 1;
  if (gamma >= 1.0) return cap;
  const double h = std::log(tol * (1.0 - gamma) / rmax) / std::log(gamma);
  return std::clamp(static_cast<int>(std::ceil(h)) + 1, 1, cap);
}

std::vector<double> discounted_visitation(const TabularMdp& mdp, const PolicyTable& policy,
                                          int horizon, double* tail_mass) {
  const InducedChain chain = induced_chain(mdp, policy);
  const int S = chain.n;
  std::vector<double> mu(static_cast<std::size_t>(S), 0.0), next(mu.size()), d(mu.size(), 0.0);
  for (int s = 0; s < S; ++s)
    if (!mdp.is_terminal(s)) mu[s] = mdp.initial_dist()[s];
  double discount = 1.0;
  double mass = sum(mu);
  for (int t = 0; t < horizon && discount * mass > 1e-17; ++t) {
    for (int s = 0; s < S; ++s) d[s] += discount * mu[s];
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < S; ++s) {
      if (mu[s] == 0.0) continue;
      const double* row = chain.p.data() + static_cast<std::size_t>(s) * S;
      for (int n = 0; n < S; ++n) next[n] += mu[s] * row[n];
    }
    mu.swap(next);
    discount *= mdp.gamma();
    mass = sum(mu);
  }
  if (tail_mass != nullptr) *tail_mass = discount * mass;
  return d;
}

ExactGradient exact_policy_gradient(const TabularMdp& mdp, const PolicyTable& policy,
                                    int horizon) {
  policy.check_matches(mdp);
  if (horizon < 1) throw ConfigError("exact_policy_gradient: horizon must be positive");
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  ExactGradient out;
  out.values = solve_policy_values(mdp, policy);
  const auto q = action_values(mdp, out.values);
  double tail = 0.0;
  const auto d = discounted_visitation(mdp, policy, horizon, &tail);

  out.estimate = UpdateEstimate(S, A);
  std::vector<double> pi(static_cast<std::size_t>(A));
  for (int s = 0; s < S; ++s) {
    if (mdp.is_terminal(s)) continue;
    policy.probs(s, pi);
    out.estimate.weight[s] = d[s];
    for (int b = 0; b < A; ++b)
      out.estimate.at(s, b) = d[s] * pi[b] * (q[static_cast<std::size_t>(s) * A + b] - out.values[s]);
  }
  double vmax = 0.0;
  for (double v : out.values.values) vmax = std::max(vmax, std::abs(v));
  out.horizon_used = horizon;
  out.tail_bound = tail * vmax / (mdp.gamma() < 1.0 ? 1.0 - mdp.gamma() : 1.0);
  out.within_tolerance = out.tail_bound < 1e-10;
  return out;
}

ExactGradient exact_policy_gradient(const TabularMdp& mdp, const PolicyTable& policy) {
  return exact_policy_gradient(mdp, policy, default_gradient_horizon(mdp));
}

// ---------------------------------------------------------------------------
// Shaping and control

TabularMdp shape_rewards(const TabularMdp& mdp, const ValueTable& potential) {
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  if (potential.size() != S) throw ConfigError("potential size does not match MDP");
  for (int s = 0; s < S; ++s) {
    if (mdp.is_terminal(s) && potential[s] != 0.0)
      throw ConfigError("potential must vanish on terminal state " + std::to_string(s));
    if (!std::isfinite(potential[s])) throw ConfigError("potential must be finite");
  }
  std::vector<double> reward = mdp.reward();
  for (int s = 0; s < S; ++s) {
    if (mdp.is_terminal(s)) continue;
    for (int a = 0; a < A; ++a)
      for (int n = 0; n < S; ++n)
        reward[(static_cast<std::size_t>(s) * A + a) * S + n] +=
            mdp.gamma() * potential[n] - potential[s];
  }
  return TabularMdp(S, A, mdp.gamma(), RewardKind::FullTransition, mdp.transition(),
                    std::move(reward), mdp.terminal(),
                    std::vector<double>(mdp.initial_dist().begin(), mdp.initial_dist().end()));
}

ValueIterationResult value_iteration(const TabularMdp& mdp, double tol, int max_iterations) {
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  ValueIterationResult out;
  out.values = ValueTable(S);
  for (int it = 0; it < max_iterations; ++it) {
    out.q = action_values(mdp, out.values);
    double delta = 0.0;
    for (int s = 0; s < S; ++s) {
      if (mdp.is_terminal(s)) continue;
      const double* row = out.q.data() + static_cast<std::size_t>(s) * A;
      const double best = *std::max_element(row, row + A);
      delta = std::max(delta, std::abs(best - out.values[s]));
      out.values[s] = best;
    }
    out.iterations = it + 1;
    if (delta < tol) {
      out.q = action_values(mdp, out.values);
      return out;
    }
  }
  throw NumericalError("value_iteration did not converge", tol);
}

std::vector<int> greedy_actions(const ValueIterationResult& vi, int n_actions, int s,
                                double tie_tol) {
  const double* row = vi.q.data() + static_cast<std::size_t>(s) * n_actions;
  const double best = *std::max_element(row, row + n_actions);
  std::vector<int> out;
  for (int a = 0; a < n_actions; ++a)
    if (row[a] >= best - tie_tol) out.push_back(a);
  return out;
}

}  // namespace hca
