#pragma once

#include "skembed/costs.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace skembed {

inline constexpr int kSchemaVersion = 1;

enum class Method { Lp, Iterative, Both };

struct ProblemOptions {
  double tol = 1e-8;
  std::uint64_t seed = 42;
  std::optional<std::size_t> t_max;
  std::vector<double> beta_schedule{1e-2, 1e-3, 1e-4};
  Method method = Method::Lp;
  std::size_t n_paths = 100000;
};

/// A validated problem: chain, initial and target laws, augmented cost.
struct Problem {
  Chain chain;
  AugmentedChain aug;
  CostModel cost;
  Measure mu;
  Measure nu;
  std::string cost_kind;
  ProblemOptions options;
};

/// Parses and validates a problem document. Throws Error with a JSON-pointer
/// field path in the message.
Problem parse_problem(const nlohmann::json& doc);

/// Reads a file; syntax errors carry line and column.
Problem load_problem(const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

std::string_view to_string(Method m) noexcept;
Method parse_method(std::string_view s);

}  // namespace skembed
