#include "kam/error.hpp"

namespace kam {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonzeroAverage: return "NonzeroAverage";
    case ErrorKind::ResonantDivisor: return "ResonantDivisor";
    case ErrorKind::StripOverflow: return "StripOverflow";
    case ErrorKind::DegenerateHessian: return "DegenerateHessian";
    case ErrorKind::DomainOverflow: return "DomainOverflow";
    case ErrorKind::SingularAverage: return "SingularAverage";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::DivergenceDetected: return "DivergenceDetected";
    case ErrorKind::WidthChainViolation: return "WidthChainViolation";
    case ErrorKind::ExactResonance: return "ExactResonance";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::SecularTerm: return "SecularTerm";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::InsufficientOrders: return "InsufficientOrders";
    case ErrorKind::DomainExit: return "DomainExit";
    case ErrorKind::ToleranceFailure: return "ToleranceFailure";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

}  // namespace kam
