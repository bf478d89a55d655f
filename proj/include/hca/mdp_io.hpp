#pragma once

#include <filesystem>
#include <iosfwd>

#include "hca/hindsight.hpp"
#include "hca/mdp.hpp"

namespace hca {

// Plain-text tabular format:
//
//   n_states <S>
//   n_actions <A>
//   gamma <g>
//   reward_kind next_state|full_transition
//   terminal <S flags 0/1>
//   initial <S floats>
//   transition
//   <S*A rows of S floats, row (s, a) at line s*A + a>
//   reward
//   <S*A rows of S floats>
//
// Lines starting with '#' are comments. Floats are written with 17
// significant digits so a write/read cycle is bit-exact.

void write_mdp(std::ostream& os, const TabularMdp& mdp);
TabularMdp read_mdp(std::istream& is);

void save_mdp(const std::filesystem::path& path, const TabularMdp& mdp);
TabularMdp load_mdp(const std::filesystem::path& path);

void write_policy(std::ostream& os, const PolicyTable& policy);
PolicyTable read_policy(std::istream& is);

// Credit residuals: header (n_states, n_actions, parametrization
// policy_prior|plain), then "residuals" and S*S rows of A floats, row
// (s, s') at line s*S + s'.
void write_credit_model(std::ostream& os, const CreditModel& model);
CreditModel read_credit_model(std::istream& is);

}  // namespace hca
