#include "hca/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace hca {

std::optional<double> NllGapCurve::gap(int delta) const {
  if (delta < 1 || delta > delta_max()) return std::nullopt;
  const auto i = static_cast<std::size_t>(delta - 1);
  if (count[i] == 0) return std::nullopt;
  return gap_sum[i] / static_cast<double>(count[i]);
}

NllGapCurve nll_gap(const CreditModel& credit, const PolicyTable& policy,
                    const RolloutBatch& rollouts, int delta_max,
                    const std::vector<bool>* state_mask) {
  credit.check_matches(policy);
  if (delta_max < 1) throw ConfigError("nll_gap: delta_max must be positive");
  NllGapCurve curve;
  curve.gap_sum.assign(static_cast<std::size_t>(delta_max), 0.0);
  curve.count.assign(static_cast<std::size_t>(delta_max), 0);
  std::vector<double> h(static_cast<std::size_t>(policy.n_actions()));
  std::vector<double> pi(h.size());
  for (const Trajectory& seg : rollouts.segments) {
    const std::size_t L = seg.steps.size();
    for (std::size_t t = 0; t < L; ++t) {
      const Step& st = seg.steps[t];
      if (state_mask != nullptr && !(*state_mask)[st.state]) continue;
      policy.probs(st.state, pi);
      const double log_pi = std::log(pi[st.action]);
      for (int d = 1; d <= delta_max && t + static_cast<std::size_t>(d) <= L; ++d) {
        const std::size_t j = t + static_cast<std::size_t>(d);
        const int future = j < L ? seg.steps[j].state : seg.steps[L - 1].next_state;
        credit_prob(credit, policy, st.state, future, h);
        curve.gap_sum[d - 1] += -std::log(h[st.action]) + log_pi;
        ++curve.count[d - 1];
      }
    }
  }
  return curve;
}

double policy_entropy(const PolicyTable& policy, int s) {
  const auto p = policy.probs(s);
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log(x);
  return std::max(h, 0.0);
}

double entropy_trace(const PolicyTable& policy, const std::vector<int>& visited) {
  if (visited.empty()) throw ConfigError("entropy_trace: no visited states");
  double acc = 0.0;
  for (int s : visited) acc += policy_entropy(policy, s);
  return acc / static_cast<double>(visited.size());
}

IdentityReport check_identity(const std::string& pair, const UpdateRule& rule_a,
                              const UpdateRule& rule_b, const std::vector<RolloutBatch>& batches,
                              double tol) {
  IdentityReport report{pair, 0.0, tol, false};
  for (const auto& batch : batches)
    report.max_abs_diff = std::max(report.max_abs_diff, max_abs_diff(rule_a(batch), rule_b(batch)));
  report.pass = report.max_abs_diff <= tol;
  return report;
}

void append_nll_gap_rows(std::vector<NllGapRow>& rows, const NllGapCurve& curve, int replicate,
                         long long step) {
  for (int d = 1; d <= curve.delta_max(); ++d) {
    const auto g = curve.gap(d);
    if (!g) continue;
    rows.push_back(NllGapRow{replicate, step, d, *g, curve.count[d - 1]});
  }
}

void write_nll_gap_csv(std::ostream& os, const std::vector<NllGapRow>& rows) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "replicate,step,delta,gap,count\n";
  for (const auto& r : rows)
    os << r.replicate << ',' << r.step << ',' << r.delta << ',' << r.gap << ',' << r.count << '\n';
}

void write_entropy_csv(std::ostream& os, const std::vector<EntropyRow>& rows) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "replicate,step,entropy\n";
  for (const auto& r : rows) os << r.replicate << ',' << r.step << ',' << r.entropy << '\n';
}

void write_identity_csv(std::ostream& os, const std::vector<IdentityReport>& reports) {
  os << std::setprecision(6);
  os << "pair,max_abs_diff,pass\n";
  for (const auto& r : reports)
    os << r.pair << ',' << r.max_abs_diff << ',' << (r.pass ? "true" : "false") << '\n';
}

}  // namespace hca
