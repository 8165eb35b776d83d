#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mqw {

enum class ErrorKind {
  NonPositiveEpsilon,
  NonPositiveHbar,
  FluxMismatch,
  MissingFlux,
  DimensionMismatch,
  ZeroNorm,
  IncommensurateMomentum,
  ConvergenceFailure,
  NoPositivePhase,
  DegenerateCurve,
  ZeroOmega,
  ZeroMomentum,
  UnresolvedGrid,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPositiveEpsilon: return "NonPositiveEpsilon";
    case ErrorKind::NonPositiveHbar: return "NonPositiveHbar";
    case ErrorKind::FluxMismatch: return "FluxMismatch";
    case ErrorKind::MissingFlux: return "MissingFlux";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ZeroNorm: return "ZeroNorm";
    case ErrorKind::IncommensurateMomentum: return "IncommensurateMomentum";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::NoPositivePhase: return "NoPositivePhase";
    case ErrorKind::DegenerateCurve: return "DegenerateCurve";
    case ErrorKind::ZeroOmega: return "ZeroOmega";
    case ErrorKind::ZeroMomentum: return "ZeroMomentum";
    case ErrorKind::UnresolvedGrid: return "UnresolvedGrid";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// True for errors caused by the caller's configuration rather than by the
/// numerics. The CLI maps these to exit code 2, everything else to 3.
constexpr bool is_config_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConvergenceFailure:
    case ErrorKind::NoPositivePhase:
    case ErrorKind::DegenerateCurve:
      return false;
    default:
      return true;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mqw
