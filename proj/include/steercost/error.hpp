#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace steercost {

enum class ErrorKind {
  NotSquare,
  NotHermitian,
  DimensionMismatch,
  ThetaOutOfRange,
  VOutOfRange,
  NotUnitVector,
  NotPrime,
  KOutOfRange,
  NotInvolution,
  ZeroProbability,
  IllFormedProblem,
  NumericalBreakdown,
  Inconclusive,
  TooManyStrategies,
  NegativeNu,
  ProtocolMismatch,
  EpsOutOfRange,
  NetSizeNotPowerOfTwo,
  InvalidArgument,
  Schema,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::NotSquare: return "NotSquare";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ThetaOutOfRange: return "ThetaOutOfRange";
    case ErrorKind::VOutOfRange: return "VOutOfRange";
    case ErrorKind::NotUnitVector: return "NotUnitVector";
    case ErrorKind::NotPrime: return "NotPrime";
    case ErrorKind::KOutOfRange: return "KOutOfRange";
    case ErrorKind::NotInvolution: return "NotInvolution";
    case ErrorKind::ZeroProbability: return "ZeroProbability";
    case ErrorKind::IllFormedProblem: return "IllFormedProblem";
    case ErrorKind::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorKind::Inconclusive: return "Inconclusive";
    case ErrorKind::TooManyStrategies: return "TooManyStrategies";
    case ErrorKind::NegativeNu: return "NegativeNu";
    case ErrorKind::ProtocolMismatch: return "ProtocolMismatch";
    case ErrorKind::EpsOutOfRange: return "EpsOutOfRange";
    case ErrorKind::NetSizeNotPowerOfTwo: return "NetSizeNotPowerOfTwo";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Schema: return "Schema";
  }
  return "Unknown";
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

/// Numerical tolerances shared by the library, the solver and the tests.
struct Tolerances {
  static constexpr double hermiticity = 1e-10;
  static constexpr double psd_slack = 1e-9;
  static constexpr double trace = 1e-10;
  static constexpr double assemblage_consistency = 1e-8;
  static constexpr double unit_vector = 1e-10;
  static constexpr double zero_probability = 1e-12;
  static constexpr double eps_feas = 1e-6;
};

}  // namespace steercost
