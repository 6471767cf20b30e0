#include "circa/errors.hpp"

namespace circa {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::WindowOutOfRange: return "WindowOutOfRange";
    case ErrorCode::MissingValue: return "MissingValue";
    case ErrorCode::MisalignedSeries: return "MisalignedSeries";
    case ErrorCode::NotDag: return "NotDag";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::CyclicCallGraph: return "CyclicCallGraph";
    case ErrorCode::UnknownService: return "UnknownService";
    case ErrorCode::UnknownMetaMetric: return "UnknownMetaMetric";
    case ErrorCode::ResultNotDag: return "ResultNotDag";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingSeries: return "MissingSeries";
    case ErrorCode::EdgeBudgetInfeasible: return "EdgeBudgetInfeasible";
    case ErrorCode::NoEffectiveFault: return "NoEffectiveFault";
    case ErrorCode::EmptyCaseSet: return "EmptyCaseSet";
    case ErrorCode::UnknownScorer: return "UnknownScorer";
    case ErrorCode::UnknownRegressor: return "UnknownRegressor";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace circa
