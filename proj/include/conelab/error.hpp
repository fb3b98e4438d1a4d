#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace conelab {

enum class ErrorKind {
  InvalidWeight,
  DomainError,
  DegreeZero,
  UnsupportedClosedForm,
  TailUnbounded,
  NonFiniteSample,
  NotNormalized,
  GradientUnavailable,
  TranslationNotInvariant,
  AlphaBetaOrder,
  MethodCostMismatch,
  EmptyDomain,
  InsufficientSlices,
  OutOfRange,
  NonIntegrable,
  MembershipIndeterminate,
  StepTooCoarse,
  DegenerateCDF,
  IntegrabilityFailure,
  ScalingNotApplied,
  ConfigInvalid,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI) can branch on it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace conelab
