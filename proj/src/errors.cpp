#include "affine_libor/errors.hpp"

namespace affine_libor {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::HorizonViolation: return "HorizonViolation";
    case ErrorKind::BlowUp: return "BlowUp";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::InfeasibleCurve: return "InfeasibleCurve";
    case ErrorKind::NonMonotoneCurve: return "NonMonotoneCurve";
    case ErrorKind::IndexError: return "IndexError";
    case ErrorKind::DampingOutOfStrip: return "DampingOutOfStrip";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::NoSignChange: return "NoSignChange";
    case ErrorKind::ModelMismatch: return "ModelMismatch";
    case ErrorKind::OutOfBounds: return "OutOfBounds";
    case ErrorKind::InvalidGrid: return "InvalidGrid";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MonotonicityError: return "MonotonicityError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace affine_libor
