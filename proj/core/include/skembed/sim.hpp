#pragma once

#include "skembed/costs.hpp"
#include "skembed/lp.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>

namespace skembed {

/// Uniform in [0, 1) determined only by (seed, path, step, stream).
double counter_uniform(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint64_t stream) noexcept;

struct SimConfig {
  std::size_t n_paths = 100000;
  std::uint64_t seed = 42;
  std::optional<std::size_t> max_steps;  ///< default 50 * max expected lifetime
  StoppingRule rule;
  unsigned threads = 0;  ///< 0: SKEMBED_THREADS or hardware concurrency
};

struct SimStats {
  std::size_t n_paths = 0;
  std::size_t max_steps = 0;
  Vec counts;                   ///< stopped paths per base state
  std::size_t killed_count = 0;
  std::size_t truncated = 0;
  double truncation_bound = 0.0;  ///< sup_x P_x(lifetime > max_steps)
  double mean_time = 0.0, se_time = 0.0;
  double mean_cost = 0.0, se_cost = 0.0;
  std::optional<double> mean_martingale, se_martingale;

  Vec law() const { return counts / static_cast<double>(n_paths); }
  double killed_frequency() const { return static_cast<double>(killed_count) / static_cast<double>(n_paths); }
};

/// Runs the rule along independent paths from mu. When `v` is given, also
/// averages the summed martingale increments V(Z_{t+1}) - (P_aug V)(Z_t)
/// before stopping. Results do not depend on the thread count. Throws
/// ExcessTruncation when more than 0.1% of paths hit max_steps.
SimStats sample_paths(const AugmentedChain& aug, const CostModel& cost, const Measure& mu, const SimConfig& config,
                      const Vec* v = nullptr);

struct EmpiricalComparison {
  double tv = 0.0;
  double tv_threshold = 0.0;
  Vec z;                    ///< per base state, then cemetery
  double max_abs_z = 0.0;
  std::optional<double> z_time, z_cost;
  bool low_power = false;
  bool pass = false;
};

EmpiricalComparison compare_empirical(const SimStats& stats, const Measure& exact,
                                      std::optional<double> exact_time = {}, std::optional<double> exact_cost = {});

/// state,empirical,exact rows, cemetery last.
void write_frequency_csv(std::ostream& os, const Chain& chain, const SimStats& stats, const Measure& exact);

/// Thread cap from SKEMBED_THREADS, else hardware concurrency (at least 1).
unsigned default_threads();

}  // namespace skembed
