#include "skembed/error.hpp"

namespace skembed {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InputError: return "InputError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::RowSumExceedsOne: return "RowSumExceedsOne";
    case ErrorCode::ModeMismatch: return "ModeMismatch";
    case ErrorCode::Reducible: return "Reducible";
    case ErrorCode::NotErgodic: return "NotErgodic";
    case ErrorCode::MarginalMismatch: return "MarginalMismatch";
    case ErrorCode::MissingCemeteryValue: return "MissingCemeteryValue";
    case ErrorCode::NoGradient: return "NoGradient";
    case ErrorCode::HorizonTooSmall: return "HorizonTooSmall";
    case ErrorCode::SubmartingaleViolated: return "SubmartingaleViolated";
    case ErrorCode::ZeroGammaState: return "ZeroGammaState";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NotOrdered: return "NotOrdered";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::GapTooLarge: return "GapTooLarge";
    case ErrorCode::NegativeIncrement: return "NegativeIncrement";
    case ErrorCode::MassLeak: return "MassLeak";
    case ErrorCode::ExcessTruncation: return "ExcessTruncation";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Infeasible:
    case ErrorCode::NotOrdered:
      return 2;
    case ErrorCode::SingularSystem:
    case ErrorCode::NonConvergence:
    case ErrorCode::NumericalBreakdown:
    case ErrorCode::Unbounded:
    case ErrorCode::GapTooLarge:
    case ErrorCode::NegativeIncrement:
    case ErrorCode::MassLeak:
    case ErrorCode::ExcessTruncation:
      return 3;
    default:
      return 1;
  }
}

}  // namespace skembed
