#pragma once

#include <stdexcept>
#include <string>

namespace hca {

/// Invalid dimensions, malformed input, or an unsupported option combination.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative solver failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Query of a hindsight entry whose conditioning event has probability zero.
class UnreachablePairError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Logs being combined do not share the same evaluation steps.
class AlignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hca
