#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nonbiloc {

enum class ErrorKind {
  NotSquare,
  NotHermitian,
  NotPSD,
  TraceNotOne,
  DimensionMismatch,
  NotBipartite,
  NotNormalized,
  NotUnitary,
  NotQubitSide,
  BadParameter,
  ComplexCoefficient,
  DegenerateMarginal,
  PreconditionViolated,
  InadmissibleMeasurement,
  InvalidObservable,
  ParseError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotSquare: return "NotSquare";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::TraceNotOne: return "TraceNotOne";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotBipartite: return "NotBipartite";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::NotUnitary: return "NotUnitary";
    case ErrorKind::NotQubitSide: return "NotQubitSide";
    case ErrorKind::BadParameter: return "BadParameter";
    case ErrorKind::ComplexCoefficient: return "ComplexCoefficient";
    case ErrorKind::DegenerateMarginal: return "DegenerateMarginal";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::InadmissibleMeasurement: return "InadmissibleMeasurement";
    case ErrorKind::InvalidObservable: return "InvalidObservable";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library. `residual` carries the measured
/// violation when there is one (negative eigenvalue, trace defect, ...),
/// and is 0 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, double residual = 0.0)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        residual_(residual) {}

  ErrorKind kind() const noexcept { return kind_; }
  double residual() const noexcept { return residual_; }

 private:
  ErrorKind kind_;
  double residual_;
};

}  // namespace nonbiloc
