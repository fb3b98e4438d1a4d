#include "conelab/error.hpp"

namespace conelab {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidWeight: return "InvalidWeight";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::DegreeZero: return "DegreeZero";
    case ErrorKind::UnsupportedClosedForm: return "UnsupportedClosedForm";
    case ErrorKind::TailUnbounded: return "TailUnbounded";
    case ErrorKind::NonFiniteSample: return "NonFiniteSample";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::GradientUnavailable: return "GradientUnavailable";
    case ErrorKind::TranslationNotInvariant: return "TranslationNotInvariant";
    case ErrorKind::AlphaBetaOrder: return "AlphaBetaOrder";
    case ErrorKind::MethodCostMismatch: return "MethodCostMismatch";
    case ErrorKind::EmptyDomain: return "EmptyDomain";
    case ErrorKind::InsufficientSlices: return "InsufficientSlices";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::NonIntegrable: return "NonIntegrable";
    case ErrorKind::MembershipIndeterminate: return "MembershipIndeterminate";
    case ErrorKind::StepTooCoarse: return "StepTooCoarse";
    case ErrorKind::DegenerateCDF: return "DegenerateCDF";
    case ErrorKind::IntegrabilityFailure: return "IntegrabilityFailure";
    case ErrorKind::ScalingNotApplied: return "ScalingNotApplied";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace conelab
