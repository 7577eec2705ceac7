#pragma once

#include "skembed/error.hpp"
#include "skembed/problem.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace skembed {

/// Command-line overrides of the problem's options.
struct RunOptions {
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<Method> method;
  std::optional<std::size_t> n_paths;
  unsigned threads = 0;
};

struct CommandOutput {
  nlohmann::json report;
  int exit_code = 0;
  std::optional<std::string> svg;  ///< barrier plot, solve only
  std::optional<std::string> csv;  ///< occupation table (solve) or frequencies (simulate)
};

/// Chain, cost and balayage checks. Exit 0 ordered, 2 not ordered.
CommandOutput run_check(const Problem& p, const RunOptions& o = {});

/// LP solve, dual extraction, certificates, optional iterative dual.
CommandOutput run_solve(const Problem& p, const RunOptions& o = {});

/// Ergodic minimal-time embedding by potentials and by the filling LP.
CommandOutput run_ergodic(const Problem& p, const RunOptions& o = {});

/// Monte Carlo run of the LP-optimal rule against its exact law.
CommandOutput run_simulate(const Problem& p, const RunOptions& o = {});

/// Re-verifies the gap certificate from the psi and occupation stored in a
/// previous solve report.
CommandOutput run_report(const Problem& p, const nlohmann::json& solve_report, const RunOptions& o = {});

/// Report for a failed command; exit code from the error class.
CommandOutput error_output(const std::string& command, const Error& e);

nlohmann::json to_json(const Vec& v);

}  // namespace skembed
