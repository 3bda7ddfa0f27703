#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qclt {

enum class ErrorKind {
  BadDocument,
  DimensionMismatch,
  NonStochasticRow,
  NegativeEntry,
  SingularStationary,
  InvalidStationary,
  NotReversible,
  JacobiNoConvergence,
  DivergentIntegral,
  NotRealSupported,
  BadIndexOrder,
  NotIrreducible,
  NotMeanZero,
  NearSingular,
  RateNotContractive,
  DegenerateSigma,
  EmptySample,
  BadArgument,
  BadProbabilities,
  EmptySupport,
  NotErgodic,
  NotHermitian,
  RationalAlpha,
  BadLength,
  CondViolated,
  GridTouchesSingularity,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::BadDocument: return "BadDocument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonStochasticRow: return "NonStochasticRow";
    case ErrorKind::NegativeEntry: return "NegativeEntry";
    case ErrorKind::SingularStationary: return "SingularStationary";
    case ErrorKind::InvalidStationary: return "InvalidStationary";
    case ErrorKind::NotReversible: return "NotReversible";
    case ErrorKind::JacobiNoConvergence: return "JacobiNoConvergence";
    case ErrorKind::DivergentIntegral: return "DivergentIntegral";
    case ErrorKind::NotRealSupported: return "NotRealSupported";
    case ErrorKind::BadIndexOrder: return "BadIndexOrder";
    case ErrorKind::NotIrreducible: return "NotIrreducible";
    case ErrorKind::NotMeanZero: return "NotMeanZero";
    case ErrorKind::NearSingular: return "NearSingular";
    case ErrorKind::RateNotContractive: return "RateNotContractive";
    case ErrorKind::DegenerateSigma: return "DegenerateSigma";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::BadArgument: return "BadArgument";
    case ErrorKind::BadProbabilities: return "BadProbabilities";
    case ErrorKind::EmptySupport: return "EmptySupport";
    case ErrorKind::NotErgodic: return "NotErgodic";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::RationalAlpha: return "RationalAlpha";
    case ErrorKind::BadLength: return "BadLength";
    case ErrorKind::CondViolated: return "CondViolated";
    case ErrorKind::GridTouchesSingularity: return "GridTouchesSingularity";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qclt
