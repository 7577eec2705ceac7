#include "obstacle.hpp"

#include "skembed/error.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace skembed::detail {

SparseKernel::SparseKernel(const Mat& kernel) {
  const Eigen::Index n = kernel.rows();
  start.reserve(static_cast<std::size_t>(n) + 1);
  start.push_back(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double p = kernel(i, j);
      if (p != 0.0) {
        col.push_back(static_cast<std::size_t>(j));
        val.push_back(p);
      }
    }
    start.push_back(col.size());
  }
}

Vec SparseKernel::apply(const Vec& v) const {
  const std::size_t n = size();
  Vec out(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = start[i]; k < start[i + 1]; ++k) s += val[k] * v(static_cast<Eigen::Index>(col[k]));
    out(static_cast<Eigen::Index>(i)) = s;
  }
  return out;
}

double obstacle_residual(const SparseKernel& p, const Vec& obstacle, const Vec& ell, const Vec& v) {
  const Vec next = obstacle.cwiseMax(p.apply(v) - ell);
  return sup_norm(next - v);
}

namespace {

// Howard policy iteration from the stopping set implied by `v`.
std::optional<Vec> policy_polish(const SparseKernel& p, const Vec& obstacle, const Vec& ell, const Vec& v0) {
  const std::size_t n = p.size();
  Vec v = v0;
  std::vector<bool> stop(n), prev;
  for (int round = 0; round < 100; ++round) {
    const Vec cont = p.apply(v) - ell;
    for (std::size_t i = 0; i < n; ++i) stop[i] = obstacle(static_cast<Eigen::Index>(i)) >= cont(static_cast<Eigen::Index>(i));
    if (stop == prev) return v;
    prev = stop;

    std::vector<Eigen::Index> pos(n, -1);
    Eigen::Index m = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (!stop[i]) pos[i] = m++;
    Mat a = Mat::Identity(m, m);
    Vec rhs(m);
    for (std::size_t i = 0; i < n; ++i) {
      if (stop[i]) continue;
      double r = -ell(static_cast<Eigen::Index>(i));
      for (std::size_t k = p.start[i]; k < p.start[i + 1]; ++k) {
        const std::size_t j = p.col[k];
        if (stop[j]) {
          r += p.val[k] * obstacle(static_cast<Eigen::Index>(j));
        } else {
          a(pos[i], pos[j]) -= p.val[k];
        }
      }
      rhs(pos[i]) = r;
    }
    Vec vc;
    try {
      vc = solve_dense(a, rhs);
    } catch (const Error&) {
      return std::nullopt;
    }
    for (std::size_t i = 0; i < n; ++i)
      v(static_cast<Eigen::Index>(i)) = stop[i] ? obstacle(static_cast<Eigen::Index>(i)) : vc(pos[i]);
  }
  return std::nullopt;
}

}  // namespace

ObstacleResult solve_obstacle(const SparseKernel& p, const Vec& obstacle, const Vec& ell, const ObstacleOptions& opts) {
  if (obstacle.size() != static_cast<Eigen::Index>(p.size()) || ell.size() != obstacle.size()) {
    throw Error(ErrorCode::DimensionMismatch, "obstacle problem dimensions disagree");
  }
  ObstacleResult out;
  Vec v = obstacle;
  double change = 0.0;
  auto try_polish = [&](const Vec& iterate) -> bool {
    const double scale = opts.tol * (1.0 + sup_norm(iterate));
    if (auto pv = policy_polish(p, obstacle, ell, iterate)) {
      const double res = obstacle_residual(p, obstacle, ell, *pv);
      if (res <= scale) {
        out.v = *pv;
        out.residual = res;
        out.polished = true;
        return true;
      }
    }
    return false;
  };

  for (out.sweeps = 0; out.sweeps < opts.max_sweeps;) {
    Vec next = obstacle.cwiseMax(p.apply(v) - ell);
    change = sup_norm(next - v);
    v.swap(next);
    ++out.sweeps;
    if (change <= opts.tol * (1.0 + sup_norm(v))) break;
    if (opts.polish_every && out.sweeps % opts.polish_every == 0 && try_polish(v)) return out;
  }
  if (try_polish(v)) return out;
  out.v = v;
  out.residual = obstacle_residual(p, obstacle, ell, v);
  if (change > opts.tol * (1.0 + sup_norm(v)) && out.residual > 1e-10 * (1.0 + sup_norm(v))) {
    throw Error(ErrorCode::NonConvergence,
                "value iteration stalled after " + std::to_string(out.sweeps) + " sweeps, residual " +
                    std::to_string(out.residual));
  }
  return out;
}

}  // namespace skembed::detail
