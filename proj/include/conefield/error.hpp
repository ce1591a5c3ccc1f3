#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace conefield {

enum class ErrorCode {
  DimensionMismatch,
  ZeroVector,
  NonPositiveEps,
  SpecParseError,
  NonFiniteSample,
  UnknownCell,
  BadScheduleParams,
  DegenerateCell,
  StartsOutsideDomain,
  BadNesting,
  RecurrentSetEscapesU,
  WindowTooSmall,
  NonPositiveS,
  PinsTooClose,
  NotAnEpigraph,
  NoValidS,
  InvalidChart,
  InvalidArgument,
  IOFailure,
  ParseError,
  ValidationError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NonPositiveEps: return "NonPositiveEps";
    case ErrorCode::SpecParseError: return "SpecParseError";
    case ErrorCode::NonFiniteSample: return "NonFiniteSample";
    case ErrorCode::UnknownCell: return "UnknownCell";
    case ErrorCode::BadScheduleParams: return "BadScheduleParams";
    case ErrorCode::DegenerateCell: return "DegenerateCell";
    case ErrorCode::StartsOutsideDomain: return "StartsOutsideDomain";
    case ErrorCode::BadNesting: return "BadNesting";
    case ErrorCode::RecurrentSetEscapesU: return "RecurrentSetEscapesU";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::NonPositiveS: return "NonPositiveS";
    case ErrorCode::PinsTooClose: return "PinsTooClose";
    case ErrorCode::NotAnEpigraph: return "NotAnEpigraph";
    case ErrorCode::NoValidS: return "NoValidS";
    case ErrorCode::InvalidChart: return "InvalidChart";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IOFailure: return "IOFailure";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above; the
/// message is prefixed with the code name so it survives plain `what()`.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace conefield
