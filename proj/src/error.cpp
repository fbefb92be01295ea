#include "mvpal/error.hpp"

namespace mvpal {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateProjection: return "DegenerateProjection";
    case ErrorCode::InsufficientViews: return "InsufficientViews";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::NoConsensus: return "NoConsensus";
    case ErrorCode::CoincidentCenters: return "CoincidentCenters";
    case ErrorCode::EmptyHeatmap: return "EmptyHeatmap";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::BudgetExceedsPool: return "BudgetExceedsPool";
    case ErrorCode::TooFewPoses: return "TooFewPoses";
    case ErrorCode::EmptyCounts: return "EmptyCounts";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace mvpal
