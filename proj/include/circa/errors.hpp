#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace circa {

enum class ErrorCode {
  InvalidArgument,
  WindowOutOfRange,
  MissingValue,
  MisalignedSeries,
  NotDag,
  UnknownNode,
  CyclicCallGraph,
  UnknownService,
  UnknownMetaMetric,
  ResultNotDag,
  InsufficientData,
  DimensionMismatch,
  MissingSeries,
  EdgeBudgetInfeasible,
  NoEffectiveFault,
  EmptyCaseSet,
  UnknownScorer,
  UnknownRegressor,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type; `code()` lets
// callers branch on the failure class without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace circa
