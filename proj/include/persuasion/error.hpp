#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace persuasion {

enum class ErrorCode {
  kParseError,
  kDimensionMismatch,
  kInvalidProbability,
  kUtilityOutOfRange,
  kDuplicateIdentifier,
  kInvalidArgument,
  kZeroProbabilitySignal,
  kNotDirectRevelation,
  kNoMassOnApproxSet,
  kStrategyNotDeterministic,
  kWrongInstance,
  kRadiusPrecondition,
  kUnknownTarget,
  kAssumptionViolated,
  kHypothesisViolated,
  kInfeasible,
  kIterationLimit,
  kLpNumericallyUnstable,
};

/// Stable identifier used in reports and CLI diagnostics.
constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError: return "PARSE_ERROR";
    case ErrorCode::kDimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::kInvalidProbability: return "INVALID_PROBABILITY";
    case ErrorCode::kUtilityOutOfRange: return "UTILITY_OUT_OF_RANGE";
    case ErrorCode::kDuplicateIdentifier: return "DUPLICATE_IDENTIFIER";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kZeroProbabilitySignal: return "ZERO_PROBABILITY_SIGNAL";
    case ErrorCode::kNotDirectRevelation: return "NOT_DIRECT_REVELATION";
    case ErrorCode::kNoMassOnApproxSet: return "NO_MASS_ON_APPROX_SET";
    case ErrorCode::kStrategyNotDeterministic: return "STRATEGY_NOT_DETERMINISTIC";
    case ErrorCode::kWrongInstance: return "WRONG_INSTANCE";
    case ErrorCode::kRadiusPrecondition: return "RADIUS_PRECONDITION";
    case ErrorCode::kUnknownTarget: return "UNKNOWN_TARGET";
    case ErrorCode::kAssumptionViolated: return "ASSUMPTION_VIOLATED";
    case ErrorCode::kHypothesisViolated: return "HYPOTHESIS_VIOLATED";
    case ErrorCode::kInfeasible: return "INFEASIBLE";
    case ErrorCode::kIterationLimit: return "ITERATION_LIMIT";
    case ErrorCode::kLpNumericallyUnstable: return "LP_NUMERICALLY_UNSTABLE";
  }
  return "UNKNOWN";
}

enum class ErrorClass { kValidation, kHypothesis, kNumerical };

constexpr ErrorClass classify(ErrorCode code) {
  switch (code) {
    case ErrorCode::kAssumptionViolated:
    case ErrorCode::kHypothesisViolated:
      return ErrorClass::kHypothesis;
    case ErrorCode::kInfeasible:
    case ErrorCode::kIterationLimit:
    case ErrorCode::kLpNumericallyUnstable:
      return ErrorClass::kNumerical;
    default:
      return ErrorClass::kValidation;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail) { throw Error(code, detail); }

inline void require(bool condition, ErrorCode code, const std::string& detail) {
  if (!condition) fail(code, detail);
}

}  // namespace persuasion
