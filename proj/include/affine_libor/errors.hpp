#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace affine_libor {

/// Failure categories shared by every module. The CLI prints the category
/// name so callers can dispatch on it.
enum class ErrorKind {
  DomainViolation,
  HorizonViolation,
  BlowUp,
  StepUnderflow,
  InvalidParameter,
  ConvergenceFailure,
  InfeasibleCurve,
  NonMonotoneCurve,
  IndexError,
  DampingOutOfStrip,
  QuadratureFailure,
  NoSignChange,
  ModelMismatch,
  OutOfBounds,
  InvalidGrid,
  ParseError,
  MonotonicityError,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace affine_libor
