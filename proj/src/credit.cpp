#include "hca/credit.hpp"

#include <algorithm>
#include <type_traits>

namespace hca {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

void credit_weights(const CreditFunction& credit, const CreditQuery& q,
                    std::span<const double> pi_t, std::span<double> out) {
  const std::size_t A = pi_t.size();
  std::visit(
      overloaded{
          [&](const IndicatorCredit&) {
            std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(A), 0.0);
            out[q.a_t] = 1.0;
          },
          [&](const NStepIndicatorCredit& c) {
            if (q.offset <= c.n) {
              std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(A), 0.0);
              out[q.a_t] = 1.0;
            } else {
              std::copy(pi_t.begin(), pi_t.end(), out.begin());
            }
          },
          [&](const LearnedCredit& c) {
            credit_prob(*c.model, *c.policy, q.s_t, q.future, out);
            if (c.clip_lambda) clip_credit(out.first(A), pi_t, *c.clip_lambda, out);
          },
          [&](const ExactStateCredit& c) {
            const auto row = c.oracle->probs(q.offset, q.s_t, q.future);
            std::copy(row.begin(), row.end(), out.begin());
          },
          [&](const ExactTransitionCredit& c) {
            if (!q.has_transition)
              throw ConfigError("transition-conditioned credit needs (s_k, a_k, s_{k+1}) context");
            c.oracle->probs(q.offset - 1, q.s_t, q.s_k, q.a_k, q.future, out);
          },
          [&](const FixedCredit& c) {
            const auto* row = c.table.data() + static_cast<std::size_t>(q.s_t) * c.n_actions;
            std::copy(row, row + c.n_actions, out.begin());
          },
      },
      credit);
}

std::string credit_name(const CreditFunction& credit) {
  return std::visit(overloaded{
                        [](const IndicatorCredit&) -> std::string { return "indicator"; },
                        [](const NStepIndicatorCredit& c) -> std::string {
                          return "n_step_indicator(" + std::to_string(c.n) + ")";
                        },
                        [](const LearnedCredit& c) -> std::string {
                          return c.clip_lambda ? "learned_clipped" : "learned";
                        },
                        [](const ExactStateCredit&) -> std::string { return "exact_state"; },
                        [](const ExactTransitionCredit&) -> std::string { return "exact_transition"; },
                        [](const FixedCredit&) -> std::string { return "fixed"; },
                    },
                    credit);
}

}  // namespace hca
