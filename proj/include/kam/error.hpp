#pragma once

#include <stdexcept>
#include <string>

namespace kam {

enum class ErrorKind {
  DimensionMismatch,
  NonzeroAverage,
  ResonantDivisor,
  StripOverflow,
  DegenerateHessian,
  DomainOverflow,
  SingularAverage,
  BudgetExceeded,
  DivergenceDetected,
  WidthChainViolation,
  ExactResonance,
  InsufficientSamples,
  SecularTerm,
  GridMismatch,
  InsufficientOrders,
  DomainExit,
  ToleranceFailure,
  InvalidArgument,
  Parse,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; the kind drives CLI exit codes and
/// lets callers treat e.g. resonance differently from divergence.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace kam
