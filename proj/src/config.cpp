#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "hca/envs.hpp"
#include "hca/harness.hpp"

namespace hca {

namespace {

constexpr const char* kAlgorithmNames[] = {"reinforce", "a2c", "n_step_a2c", "hca",
                                           "hca_prior", "hca_value", "hca_value_clip"};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T v{};
  if (!(in >> v) || !(in >> std::ws).eof())
    throw ConfigError("config: bad value '" + text + "' for " + key);
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("config: bad boolean '" + text + "' for " + key);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

}  // namespace

std::string to_string(Algorithm algorithm) {
  return kAlgorithmNames[static_cast<int>(algorithm)];
}

Algorithm algorithm_from_string(const std::string& name) {
  for (int i = 0; i < 7; ++i)
    if (name == kAlgorithmNames[i]) return static_cast<Algorithm>(i);
  throw ConfigError("unknown algorithm '" + name + "'");
}

bool uses_credit(Algorithm algorithm) {
  return algorithm == Algorithm::Hca || algorithm == Algorithm::HcaPrior ||
         algorithm == Algorithm::HcaValue || algorithm == Algorithm::HcaValueClip;
}

bool uses_value(Algorithm algorithm) { return algorithm != Algorithm::Reinforce; }

void ExperimentConfig::validate() const {
  static const std::set<std::string> envs = {"frozenlake", "frozenlake_penalty", "delayed_chain",
                                             "two_arm", "chain3"};
  if (!envs.count(env.name)) throw ConfigError("config: unknown environment '" + env.name + "'");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("config: gamma must lie in (0, 1]");
  if (rollout_steps < 1) throw ConfigError("config: T must be positive");
  for (double lr : {lr_policy, lr_value, lr_credit, lr_reward})
    if (!(lr > 0.0)) throw ConfigError("config: learning rates must be positive");
  if (entropy_coef < 0.0) throw ConfigError("config: entropy_coef must be nonnegative");
  if (lambda_clip && algorithm != Algorithm::HcaValueClip)
    throw ConfigError("config: lambda_clip applies only to hca_value_clip");
  if (lambda_clip && !(*lambda_clip > 0.0)) throw ConfigError("config: lambda_clip must be positive");
  if (n_step && algorithm != Algorithm::NStepA2c)
    throw ConfigError("config: N applies only to n_step_a2c");
  if (n_step && *n_step < 1) throw ConfigError("config: N must be positive");
  if (credit_batches_per_update < 1)
    throw ConfigError("config: credit_batches_per_update must be positive");
  if (budget_steps < 1) throw ConfigError("config: training budget must be positive");
  if (replicates < 1) throw ConfigError("config: replicates must be at least 1");
  if (eval_every < 1 || eval_episodes < 1)
    throw ConfigError("config: evaluation cadence and episode count must be positive");
  if (max_episode_steps < 1) throw ConfigError("config: max_episode_steps must be positive");
  std::vector<std::string> order = update_order;
  std::sort(order.begin(), order.end());
  if (order != std::vector<std::string>{"credit", "policy", "value"})
    throw ConfigError("config: update_order must list credit, value and policy once each");
  if (nll_gap_delta_max < 0 || nll_gap_delta_max > rollout_steps)
    throw ConfigError("config: nll_gap_delta_max must lie in 0..T");
  if (nll_gap_delta_max > 0 && !uses_credit(algorithm))
    throw ConfigError("config: nll_gap_delta_max needs a credit-based algorithm");
  if (hca_estimator != "state" && hca_estimator != "deep")
    throw ConfigError("config: hca_estimator must be state or deep");
  if (env.name == "delayed_chain" && (env.delay < 0 || env.decision_states < 1 || env.n_actions < 2))
    throw ConfigError("config: bad delayed_chain parameters");
  make_environment(env, gamma);  // builder checks maps and sizes
}

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig c;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError("config: repeated key '" + key + "'");
    if (key == "env") c.env.name = value;
    else if (key == "map") c.env.map = value;
    else if (key == "slippery") c.env.slippery = parse_bool(key, value);
    else if (key == "hole_penalty") c.env.hole_penalty = parse_number<double>(key, value);
    else if (key == "delay") c.env.delay = parse_number<int>(key, value);
    else if (key == "decision_states") c.env.decision_states = parse_number<int>(key, value);
    else if (key == "n_actions") c.env.n_actions = parse_number<int>(key, value);
    else if (key == "algorithm") c.algorithm = algorithm_from_string(value);
    else if (key == "gamma") c.gamma = parse_number<double>(key, value);
    else if (key == "T") c.rollout_steps = parse_number<int>(key, value);
    else if (key == "lr_policy") c.lr_policy = parse_number<double>(key, value);
    else if (key == "lr_value") c.lr_value = parse_number<double>(key, value);
    else if (key == "lr_credit") c.lr_credit = parse_number<double>(key, value);
    else if (key == "lr_reward") c.lr_reward = parse_number<double>(key, value);
    else if (key == "entropy_coef") c.entropy_coef = parse_number<double>(key, value);
    else if (key == "lambda_clip") c.lambda_clip = parse_number<double>(key, value);
    else if (key == "N") c.n_step = parse_number<int>(key, value);
    else if (key == "credit_batches_per_update") c.credit_batches_per_update = parse_number<int>(key, value);
    else if (key == "max_grad_norm") c.max_grad_norm = parse_number<double>(key, value);
    else if (key == "budget_steps") c.budget_steps = parse_number<long long>(key, value);
    else if (key == "replicates") c.replicates = parse_number<int>(key, value);
    else if (key == "base_seed") c.base_seed = parse_number<std::uint64_t>(key, value);
    else if (key == "out_dir") c.out_dir = value;
    else if (key == "eval_every") c.eval_every = parse_number<long long>(key, value);
    else if (key == "eval_episodes") c.eval_episodes = parse_number<int>(key, value);
    else if (key == "max_episode_steps") c.max_episode_steps = parse_number<int>(key, value);
    else if (key == "update_order") c.update_order = split_list(value);
    else if (key == "hca_estimator") c.hca_estimator = value;
    else if (key == "nll_gap_delta_max") c.nll_gap_delta_max = parse_number<int>(key, value);
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path.string() + "'");
  return parse_config(is);
}

void write_config(std::ostream& os, const ExperimentConfig& c) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "env = " << c.env.name << '\n';
  if (c.env.name.rfind("frozenlake", 0) == 0) {
    os << "map = " << c.env.map << '\n';
    os << "slippery = " << (c.env.slippery ? "true" : "false") << '\n';
    if (c.env.name == "frozenlake_penalty") os << "hole_penalty = " << c.env.hole_penalty << '\n';
  }
  if (c.env.name == "delayed_chain") {
    os << "delay = " << c.env.delay << '\n';
    os << "decision_states = " << c.env.decision_states << '\n';
    os << "n_actions = " << c.env.n_actions << '\n';
  }
  os << "algorithm = " << to_string(c.algorithm) << '\n';
  os << "gamma = " << c.gamma << '\n';
  os << "T = " << c.rollout_steps << '\n';
  os << "lr_policy = " << c.lr_policy << '\n';
  os << "lr_value = " << c.lr_value << '\n';
  os << "lr_credit = " << c.lr_credit << '\n';
  os << "lr_reward = " << c.lr_reward << '\n';
  os << "entropy_coef = " << c.entropy_coef << '\n';
  if (c.lambda_clip) os << "lambda_clip = " << *c.lambda_clip << '\n';
  if (c.n_step) os << "N = " << *c.n_step << '\n';
  os << "credit_batches_per_update = " << c.credit_batches_per_update << '\n';
  os << "max_grad_norm = " << c.max_grad_norm << '\n';
  os << "budget_steps = " << c.budget_steps << '\n';
  os << "replicates = " << c.replicates << '\n';
  os << "base_seed = " << c.base_seed << '\n';
  os << "out_dir = " << c.out_dir << '\n';
  os << "eval_every = " << c.eval_every << '\n';
  os << "eval_episodes = " << c.eval_episodes << '\n';
  os << "max_episode_steps = " << c.max_episode_steps << '\n';
  os << "update_order = ";
  for (std::size_t i = 0; i < c.update_order.size(); ++i)
    os << (i ? "," : "") << c.update_order[i];
  os << '\n';
  os << "nll_gap_delta_max = " << c.nll_gap_delta_max << '\n';
  os << "hca_estimator = " << c.hca_estimator << '\n';
}

TabularMdp make_environment(const EnvironmentSpec& env, double gamma) {
  if (env.name == "frozenlake" || env.name == "frozenlake_penalty") {
    FrozenLakeConfig fl;
    fl.map = parse_lake_map(env.map);
    fl.slippery = env.slippery;
    fl.gamma = gamma;
    fl.hole_penalty = env.name == "frozenlake_penalty" ? env.hole_penalty : 0.0;
    return make_frozenlake(fl);
  }
  if (env.name == "delayed_chain")
    return make_delayed_chain(DelayedChainConfig{env.decision_states, env.delay, env.n_actions, gamma});
  if (env.name == "two_arm") return make_two_arm(gamma);
  if (env.name == "chain3") return make_chain3(gamma);
  throw ConfigError("unknown environment '" + env.name + "'");
}

TabularMdp make_evaluation_environment(const EnvironmentSpec& env, double gamma) {
  if (env.name == "frozenlake_penalty") {
    EnvironmentSpec plain = env;
    plain.name = "frozenlake";
    return make_environment(plain, gamma);
  }
  return make_environment(env, gamma);
}

}  // namespace hca
