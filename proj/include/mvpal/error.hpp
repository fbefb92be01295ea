#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mvpal {

enum class ErrorCode {
  DegenerateProjection,
  InsufficientViews,
  IllConditioned,
  NoConsensus,
  CoincidentCenters,
  EmptyHeatmap,
  IndexOutOfRange,
  DimensionMismatch,
  EmptyPool,
  BudgetExceedsPool,
  TooFewPoses,
  EmptyCounts,
  ParseError,
  InvariantViolation,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this exception type; callers
// branch on code() rather than on the message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mvpal
