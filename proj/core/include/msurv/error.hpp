#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace msurv {

enum class ErrorCode {
  EmptyInput,
  InvalidTime,
  InvalidArgument,
  BoundaryValue,
  UndefinedVariance,
  NoEvents,
  UpperUnstable,
  MissingLimit,
  InvalidLevel,
  InvalidTails,
  ZeroSE,
  NonpositiveMedian,
  ZeroVariance,
  EmptyMeta,
  InsufficientStudies,
  UndefinedRateExceeded,
  ParseError,
  InvariantViolation,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries a machine-readable code so
// callers (the simulation drivers in particular) can branch on the kind of
// failure without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace msurv
