#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stochlie {

enum class ErrorKind {
  Dimension,
  Singularity,
  Range,
  GroupMismatch,
  Closure,
  Membership,
  NotInAlgebra,
  Metric,
  Unsupported,
  IntegratorDrift,
  GridMismatch,
  Precondition,
  Power,
  Usage,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Singularity: return "singularity";
    case ErrorKind::Range: return "range";
    case ErrorKind::GroupMismatch: return "group-mismatch";
    case ErrorKind::Closure: return "closure";
    case ErrorKind::Membership: return "membership";
    case ErrorKind::NotInAlgebra: return "not-in-algebra";
    case ErrorKind::Metric: return "metric";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::IntegratorDrift: return "integrator-drift";
    case ErrorKind::GridMismatch: return "grid-mismatch";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Power: return "power";
    case ErrorKind::Usage: return "usage";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace stochlie
