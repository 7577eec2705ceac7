#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skembed {

enum class ErrorCode {
  // input / schema
  InputError,
  DimensionMismatch,
  NegativeEntry,
  RowSumExceedsOne,
  ModeMismatch,
  Reducible,
  NotErgodic,
  MarginalMismatch,
  MissingCemeteryValue,
  NoGradient,
  HorizonTooSmall,
  SubmartingaleViolated,
  ZeroGammaState,
  // embedding
  Infeasible,
  NotOrdered,
  // numerical
  SingularSystem,
  NonConvergence,
  NumericalBreakdown,
  Unbounded,
  GapTooLarge,
  NegativeIncrement,
  MassLeak,
  ExcessTruncation,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exit-code class for a failure: 1 input, 2 infeasible, 3 numerical.
int exit_code_for(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace skembed
