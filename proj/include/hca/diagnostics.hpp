#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hca/agents.hpp"
#include "hca/hindsight.hpp"
#include "hca/mdp.hpp"

namespace hca {

/// Mean over (s_t, a_t, s_{t+Δ}) of −log h(a_t|s_t,s_{t+Δ}) + log π(a_t|s_t).
/// Negative entries mean the credit model predicts the sampled action better
/// than the policy does.
struct NllGapCurve {
  std::vector<double> gap_sum;    // index Δ − 1
  std::vector<long long> count;   // index Δ − 1

  int delta_max() const noexcept { return static_cast<int>(count.size()); }
  /// Mean gap at Δ, nullopt when no pairs were observed.
  std::optional<double> gap(int delta) const;
};

/// `state_mask`, when given, restricts s_t to states whose flag is set.
NllGapCurve nll_gap(const CreditModel& credit, const PolicyTable& policy,
                    const RolloutBatch& rollouts, int delta_max,
                    const std::vector<bool>* state_mask = nullptr);

/// Mean Shannon entropy (nats) of π rows over the visited states.
double entropy_trace(const PolicyTable& policy, const std::vector<int>& visited);

double policy_entropy(const PolicyTable& policy, int s);

struct IdentityReport {
  std::string pair;
  double max_abs_diff = 0.0;
  double tol = 0.0;
  bool pass = false;
};

using UpdateRule = std::function<UpdateEstimate(const RolloutBatch&)>;

/// Runs both rules on every batch and records the worst componentwise difference.
IdentityReport check_identity(const std::string& pair, const UpdateRule& rule_a,
                              const UpdateRule& rule_b, const std::vector<RolloutBatch>& batches,
                              double tol);

// CSV writers.
struct NllGapRow {
  int replicate = 0;
  long long step = 0;
  int delta = 0;
  double gap = 0.0;
  long long count = 0;
};

struct EntropyRow {
  int replicate = 0;
  long long step = 0;
  double entropy = 0.0;
};

void append_nll_gap_rows(std::vector<NllGapRow>& rows, const NllGapCurve& curve, int replicate,
                         long long step);
void write_nll_gap_csv(std::ostream& os, const std::vector<NllGapRow>& rows);
void write_entropy_csv(std::ostream& os, const std::vector<EntropyRow>& rows);
void write_identity_csv(std::ostream& os, const std::vector<IdentityReport>& reports);

}  // namespace hca
