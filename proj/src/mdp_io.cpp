#include "hca/mdp_io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "hca/table_io.hpp"

namespace hca {

void write_mdp(std::ostream& os, const TabularMdp& mdp) {
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "# tabular mdp\n";
  os << "n_states " << S << "\n";
  os << "n_actions " << A << "\n";
  os << "gamma " << mdp.gamma() << "\n";
  os << "reward_kind " << to_string(mdp.reward_kind()) << "\n";
  os << "terminal";
  for (int s = 0; s < S; ++s) os << ' ' << (mdp.is_terminal(s) ? 1 : 0);
  os << "\ninitial";
  for (double p : mdp.initial_dist()) os << ' ' << p;
  os << "\ntransition\n";
  table_io::write_rows(os, mdp.transition(), S);
  os << "reward\n";
  table_io::write_rows(os, mdp.reward(), S);
}

TabularMdp read_mdp(std::istream& is) {
  table_io::TokenReader in(is);
  const int S = in.keyed_int("n_states");
  const int A = in.keyed_int("n_actions");
  if (S < 1 || A < 1) throw ConfigError("mdp file: n_states and n_actions must be positive");
  const double gamma = in.keyed_double("gamma");
  in.expect("reward_kind");
  const RewardKind kind = reward_kind_from_string(in.word());
  in.expect("terminal");
  std::vector<bool> terminal(static_cast<std::size_t>(S));
  for (int s = 0; s < S; ++s) {
    const int flag = in.integer();
    if (flag != 0 && flag != 1) throw ConfigError("mdp file: terminal flags must be 0 or 1");
    terminal[s] = flag == 1;
  }
  in.expect("initial");
  std::vector<double> initial = in.doubles(static_cast<std::size_t>(S));
  const std::size_t cube = static_cast<std::size_t>(S) * A * S;
  in.expect("transition");
  std::vector<double> transition = in.doubles(cube);
  in.expect("reward");
  std::vector<double> reward = in.doubles(cube);
  return TabularMdp(S, A, gamma, kind, std::move(transition), std::move(reward),
                    std::move(terminal), std::move(initial));
}

void save_mdp(const std::filesystem::path& path, const TabularMdp& mdp) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open '" + path.string() + "' for writing");
  write_mdp(os, mdp);
}

TabularMdp load_mdp(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open '" + path.string() + "'");
  return read_mdp(is);
}

void write_policy(std::ostream& os, const PolicyTable& policy) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "# policy logits\n";
  os << "n_states " << policy.n_states() << "\n";
  os << "n_actions " << policy.n_actions() << "\n";
  os << "logits\n";
  table_io::write_rows(os, policy.logits(), policy.n_actions());
}

PolicyTable read_policy(std::istream& is) {
  table_io::TokenReader in(is);
  const int S = in.keyed_int("n_states");
  const int A = in.keyed_int("n_actions");
  if (S < 1 || A < 1) throw ConfigError("policy file: dimensions must be positive");
  in.expect("logits");
  return PolicyTable(S, A, in.doubles(static_cast<std::size_t>(S) * A));
}

void write_credit_model(std::ostream& os, const CreditModel& model) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "# credit residuals g[s][s'][a]\n";
  os << "n_states " << model.n_states() << "\n";
  os << "n_actions " << model.n_actions() << "\n";
  os << "parametrization "
     << (model.parametrization() == CreditParametrization::PolicyPrior ? "policy_prior" : "plain")
     << "\n";
  os << "residuals\n";
  table_io::write_rows(os, model.residuals(), model.n_actions());
}

CreditModel read_credit_model(std::istream& is) {
  table_io::TokenReader in(is);
  const int S = in.keyed_int("n_states");
  const int A = in.keyed_int("n_actions");
  if (S < 1 || A < 1) throw ConfigError("credit file: dimensions must be positive");
  in.expect("parametrization");
  const std::string kind = in.word();
  CreditParametrization param;
  if (kind == "policy_prior")
    param = CreditParametrization::PolicyPrior;
  else if (kind == "plain")
    param = CreditParametrization::Plain;
  else
    throw ConfigError("credit file: unknown parametrization '" + kind + "'");
  in.expect("residuals");
  CreditModel model(S, A, param);
  model.residuals() = in.doubles(static_cast<std::size_t>(S) * S * A);
  return model;
}

}  // namespace hca
