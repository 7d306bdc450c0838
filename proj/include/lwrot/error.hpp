#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lwrot {

enum class ErrorCode {
  NonFinite,
  NotHyperbolic,
  NonPositiveA,
  NonPositiveZ0,
  ExcludedBoundary,
  ZeroC,
  ZeroHeight,
  SingularDenominator,
  NegativeRadicand,
  DriftExceeded,
  CapReached,
  StepSizeUnderflow,
  NotPeriodic,
  NotACriticalPoint,
  UnexpectedSingularity,
  DegenerateCurve,
  InvalidArgument,
  IoFailure,
  ParseError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NotHyperbolic: return "NotHyperbolic";
    case ErrorCode::NonPositiveA: return "NonPositiveA";
    case ErrorCode::NonPositiveZ0: return "NonPositiveZ0";
    case ErrorCode::ExcludedBoundary: return "ExcludedBoundary";
    case ErrorCode::ZeroC: return "ZeroC";
    case ErrorCode::ZeroHeight: return "ZeroHeight";
    case ErrorCode::SingularDenominator: return "SingularDenominator";
    case ErrorCode::NegativeRadicand: return "NegativeRadicand";
    case ErrorCode::DriftExceeded: return "DriftExceeded";
    case ErrorCode::CapReached: return "CapReached";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::NotPeriodic: return "NotPeriodic";
    case ErrorCode::NotACriticalPoint: return "NotACriticalPoint";
    case ErrorCode::UnexpectedSingularity: return "UnexpectedSingularity";
    case ErrorCode::DegenerateCurve: return "DegenerateCurve";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lwrot
