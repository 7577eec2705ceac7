#pragma once

#include "skembed/linalg.hpp"

#include <cstddef>
#include <vector>

namespace skembed::detail {

/// Row-compressed copy of a dense sub-stochastic kernel.
struct SparseKernel {
  std::vector<std::size_t> start;
  std::vector<std::size_t> col;
  std::vector<double> val;

  explicit SparseKernel(const Mat& kernel);
  std::size_t size() const { return start.size() - 1; }
  Vec apply(const Vec& v) const;
};

struct ObstacleOptions {
  double tol = 1e-13;
  std::size_t max_sweeps = 1000000;
  std::size_t polish_every = 2000;
};

struct ObstacleResult {
  Vec v;
  std::size_t sweeps = 0;
  double residual = 0.0;
  bool polished = false;
};

/// Least fixed point of v = max(obstacle, P v - ell) above the obstacle, by
/// value iteration started at the obstacle, polished by policy evaluation.
ObstacleResult solve_obstacle(const SparseKernel& p, const Vec& obstacle, const Vec& ell, const ObstacleOptions& opts);

double obstacle_residual(const SparseKernel& p, const Vec& obstacle, const Vec& ell, const Vec& v);

}  // namespace skembed::detail
