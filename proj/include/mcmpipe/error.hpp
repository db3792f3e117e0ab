#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mcmpipe {

enum class ErrorKind {
  InvalidLayer,
  InvariantViolation,
  ParseError,
  UnknownNetwork,
  UnsupportedPartition,
  InvalidRegionSize,
  SizeMismatch,
  TooManyClusters,
  InfeasibleSchedule,
  NoFeasibleSchedule,
  LayerTooLarge,
  SpaceTooLarge,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidLayer: return "invalid-layer";
    case ErrorKind::InvariantViolation: return "invariant-violation";
    case ErrorKind::ParseError: return "parse-error";
    case ErrorKind::UnknownNetwork: return "unknown-network";
    case ErrorKind::UnsupportedPartition: return "unsupported-partition";
    case ErrorKind::InvalidRegionSize: return "invalid-n";
    case ErrorKind::SizeMismatch: return "size-mismatch";
    case ErrorKind::TooManyClusters: return "too-many-clusters";
    case ErrorKind::InfeasibleSchedule: return "infeasible-schedule";
    case ErrorKind::NoFeasibleSchedule: return "no-feasible-schedule";
    case ErrorKind::LayerTooLarge: return "layer-too-large";
    case ErrorKind::SpaceTooLarge: return "space-too-large";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mcmpipe
