#include "msurv/error.hpp"

namespace msurv {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidTime: return "InvalidTime";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BoundaryValue: return "BoundaryValue";
    case ErrorCode::UndefinedVariance: return "UndefinedVariance";
    case ErrorCode::NoEvents: return "NoEvents";
    case ErrorCode::UpperUnstable: return "UpperUnstable";
    case ErrorCode::MissingLimit: return "MissingLimit";
    case ErrorCode::InvalidLevel: return "InvalidLevel";
    case ErrorCode::InvalidTails: return "InvalidTails";
    case ErrorCode::ZeroSE: return "ZeroSE";
    case ErrorCode::NonpositiveMedian: return "NonpositiveMedian";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::EmptyMeta: return "EmptyMeta";
    case ErrorCode::InsufficientStudies: return "InsufficientStudies";
    case ErrorCode::UndefinedRateExceeded: return "UndefinedRateExceeded";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace msurv
