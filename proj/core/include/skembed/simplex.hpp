#pragma once

#include "skembed/linalg.hpp"

#include <cstddef>
#include <vector>

namespace skembed {

enum class RowType { LessEqual, Equal, GreaterEqual };
enum class Sense { Minimize, Maximize };
enum class LpStatus { Optimal, Infeasible, Unbounded };
enum class Pricing { Dantzig, Bland };

std::string_view to_string(LpStatus status) noexcept;

/// optimize c'x subject to A x (<=|=|>=) b, x >= 0.
struct LinearProgram {
  Mat a;
  Vec b;
  std::vector<RowType> rows;
  Vec c;
  Sense sense = Sense::Minimize;
};

struct SimplexOptions {
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  double pivot_tol = 1e-12;
  std::size_t refactor_every = 50;
  std::size_t max_iterations = 200000;
  Pricing pricing = Pricing::Dantzig;
  /// consecutive degenerate pivots before Dantzig pricing falls back to Bland
  std::size_t degenerate_limit = 50;
};

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Vec x;
  double objective = 0.0;
  /// d objective / d b_i at the optimum, one per constraint row
  Vec duals;
  Vec reduced_costs;
  std::vector<std::size_t> basis;  ///< column indices, slacks numbered after structurals
  /// Infeasible: y with y'A <= 0 on every column, y'b > 0, y_i <= 0 on <= rows
  /// and y_i >= 0 on >= rows.
  Vec farkas;
  /// Unbounded: x-direction d >= 0 with A d (<=|=|>=) 0 and c'd improving.
  Vec ray;
  std::size_t iterations = 0;
  bool used_bland = false;
};

/// Two-phase revised simplex with an explicit basis inverse, periodic LU
/// refactorization and Dantzig pricing that falls back to Bland's rule on
/// degenerate stalls.
LpResult solve_lp(const LinearProgram& lp, const SimplexOptions& opts = {});

/// Largest violation of y'A <= 0 / sign conditions, and y'b.
struct FarkasCheck {
  double max_violation = 0.0;
  double yb = 0.0;
};
FarkasCheck check_farkas(const LinearProgram& lp, const Vec& y);

}  // namespace skembed
