#pragma once

// Independent reference computations used only by tests. Dense and slow on
// purpose: none of this goes through the library's solvers.

#include "skembed/costs.hpp"
#include "skembed/lp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace skembed::oracle {

/// Green matrix G = (I - P)^{-1} of a transient kernel.
inline Mat green(const Mat& p) {
  const auto n = p.rows();
  return (Mat::Identity(n, n) - p).fullPivLu().inverse();
}

/// Expected hitting time of `target` (absorbing elsewhere is not allowed).
inline Vec hitting_time(const Mat& p, const std::vector<bool>& target) {
  const auto n = p.rows();
  Mat a = Mat::Identity(n, n);
  Vec b = Vec::Zero(n);
  for (Eigen::Index x = 0; x < n; ++x) {
    if (target[static_cast<std::size_t>(x)]) continue;
    b(x) = 1.0;
    for (Eigen::Index y = 0; y < n; ++y)
      if (!target[static_cast<std::size_t>(y)]) a(x, y) -= p(x, y);
  }
  return a.fullPivLu().solve(b);
}

/// Envelope V = max(obstacle, P V - ell) by dense value iteration followed by
/// exact evaluation of the greedy policy, repeated until the policy is stable.
inline Vec envelope(const Mat& p, const Vec& obstacle, const Vec& ell) {
  const auto n = p.rows();
  Vec v = obstacle;
  for (int k = 0; k < 200000; ++k) {
    Vec next = obstacle.cwiseMax(p * v - ell);
    const double d = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (d < 1e-14 * (1.0 + v.cwiseAbs().maxCoeff())) break;
  }
  for (int round = 0; round < 50; ++round) {
    Vec cont = p * v - ell;
    Mat a = Mat::Identity(n, n);
    Vec b(n);
    for (Eigen::Index z = 0; z < n; ++z) {
      if (obstacle(z) >= cont(z)) {
        b(z) = obstacle(z);
      } else {
        a.row(z) -= p.row(z);
        b(z) = -ell(z);
      }
    }
    Vec w = a.fullPivLu().solve(b);
    const double d = (w - v).cwiseAbs().maxCoeff();
    v = w;
    if (d < 1e-15 * (1.0 + v.cwiseAbs().maxCoeff())) break;
  }
  return v;
}

/// psi read at each augmented state's base coordinate.
inline Vec lift(const AugmentedChain& aug, const Vec& psi) {
  Vec out(static_cast<Eigen::Index>(aug.size()));
  for (std::size_t z = 0; z < aug.size(); ++z)
    out(static_cast<Eigen::Index>(z)) = psi(static_cast<Eigen::Index>(aug.base_of(z)));
  return out;
}

inline Vec lift_mu(const AugmentedChain& aug, const Measure& mu) {
  Vec out = Vec::Zero(static_cast<Eigen::Index>(aug.size()));
  for (std::size_t x = 0; x < mu.size(); ++x) {
    const double m = mu.mass(static_cast<Eigen::Index>(x));
    if (m == 0.0) continue;
    out(static_cast<Eigen::Index>(*aug.initial_state(x))) += m;
  }
  return out;
}

/// U(psi) = psi.nu - mu~.(V - Lambda), envelope from the dense oracle.
inline double dual_value(const AugmentedChain& aug, const CostModel& cost, const Measure& mu, const Measure& nu,
                         const Vec& psi) {
  const Vec v = envelope(aug.kernel(), lift(aug, psi), cost.lagrangian);
  const Vec m = lift_mu(aug, mu);
  double g0 = 0.0;
  for (Eigen::Index z = 0; z < m.size(); ++z)
    if (m(z) > 0.0) g0 += m(z) * (v(z) - cost.start_value(static_cast<std::size_t>(z)));
  return psi.dot(nu.mass) - g0;
}

struct ForwardLaw {
  Vec stopped;  ///< per augmented state
  double killed = 0.0;
  double expected_time = 0.0;
  double running_cost = 0.0;  ///< sum over continued mass of l
};

/// Propagates the distribution step by step under a memoryless rule until
/// the surviving mass is negligible.
inline ForwardLaw forward(const AugmentedChain& aug, const Vec& ell, const Vec& p_stop, const Vec& start) {
  ForwardLaw out;
  out.stopped = Vec::Zero(start.size());
  Vec cur = start;
  const Mat& k = aug.kernel();
  for (int step = 0; step < 1000000 && cur.sum() > 1e-16; ++step) {
    const Vec stop = cur.cwiseProduct(p_stop);
    const Vec go = cur - stop;
    out.stopped += stop;
    out.expected_time += go.sum();
    out.running_cost += go.dot(ell);
    out.killed += go.dot(aug.kill_vector());
    cur = k.transpose() * go;
  }
  return out;
}

inline Vec project(const AugmentedChain& aug, const Vec& per_state) {
  Vec out = Vec::Zero(static_cast<Eigen::Index>(aug.base().size()));
  for (std::size_t z = 0; z < aug.size(); ++z)
    out(static_cast<Eigen::Index>(aug.base_of(z))) += per_state(static_cast<Eigen::Index>(z));
  return out;
}

/// Stationary law by solving gamma (I - P) = 0 with the normalization row.
inline Vec stationary(const Mat& p) {
  const auto n = p.rows();
  Mat a(n + 1, n);
  a.topRows(n) = (Mat::Identity(n, n) - p).transpose();
  a.row(n).setOnes();
  Vec b = Vec::Zero(n + 1);
  b(n) = 1.0;
  return a.colPivHouseholderQr().solve(b);
}

}  // namespace skembed::oracle
