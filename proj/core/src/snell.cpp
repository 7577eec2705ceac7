#include "skembed/snell.hpp"

#include "obstacle.hpp"
#include "skembed/error.hpp"
#include "skembed/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace skembed {

Vec lift_potential(const AugmentedChain& aug, const Vec& psi) {
  if (psi.size() != static_cast<Eigen::Index>(aug.base().size())) {
    throw Error(ErrorCode::DimensionMismatch, "potential length does not match the base chain");
  }
  Vec out(static_cast<Eigen::Index>(aug.size()));
  for (std::size_t z = 0; z < aug.size(); ++z) out(static_cast<Eigen::Index>(z)) = psi(static_cast<Eigen::Index>(aug.base_of(z)));
  return out;
}

ValueFunction snell_envelope(const AugmentedChain& aug, const CostModel& cost, const Vec& psi,
                             const SnellOptions& opts) {
  if (aug.base().mode() == Mode::Ergodic && aug.kind() != AuxKind::Time) {
    throw Error(ErrorCode::ModeMismatch, "Snell envelope needs an absorbing chain; regularize the ergodic chain first");
  }
  if (!psi.allFinite()) throw Error(ErrorCode::InputError, "potential must be finite");
  const detail::SparseKernel p(aug.kernel());
  const auto res = detail::solve_obstacle(p, lift_potential(aug, psi), cost.lagrangian,
                                          {opts.tol, opts.max_sweeps, opts.polish_every});
  return {res.v, res.sweeps, res.residual, res.polished};
}

Vec continuation_value(const AugmentedChain& aug, const CostModel& cost, const Vec& v) {
  return aug.kernel() * v - cost.lagrangian;
}

double snell_residual(const AugmentedChain& aug, const CostModel& cost, const Vec& psi, const Vec& v) {
  const Vec next = lift_potential(aug, psi).cwiseMax(continuation_value(aug, cost, v));
  return sup_norm(next - v);
}

Vec doob_meyer(const AugmentedChain& aug, const CostModel& cost, const Vec& v, double tol) {
  Vec alpha = v - continuation_value(aug, cost, v);
  Eigen::Index at = 0;
  const double worst = alpha.size() ? alpha.minCoeff(&at) : 0.0;
  if (worst < -tol) {
    throw Error(ErrorCode::NegativeIncrement,
                "increment " + std::to_string(worst) + " at " + aug.label(static_cast<std::size_t>(at)));
  }
  return alpha;
}

NormalizedPotential normalize_psi(const AugmentedChain& aug, const CostModel& cost, const Vec& psi) {
  const auto sub = check_submartingale(aug, cost);
  if (!sub.pass) {
    throw Error(ErrorCode::SubmartingaleViolated, "normalization requires a submartingale cost");
  }
  NormalizedPotential out;
  out.reduite = reduite(aug.base(), psi);
  out.psi_bar = (psi - out.reduite).cwiseMin(0.0);
  return out;
}

Vec psi_max(const AugmentedChain& aug, const Vec& mu_aug, const Vec& v) {
  const auto reach = reachable_from(aug, mu_aug);
  const auto n = static_cast<Eigen::Index>(aug.base().size());
  Vec out = Vec::Constant(n, std::numeric_limits<double>::infinity());
  for (std::size_t z = 0; z < aug.size(); ++z) {
    if (!reach[z]) continue;
    const auto x = static_cast<Eigen::Index>(aug.base_of(z));
    out(x) = std::min(out(x), v(static_cast<Eigen::Index>(z)));
  }
  for (Eigen::Index x = 0; x < n; ++x)
    if (!std::isfinite(out(x))) out(x) = 0.0;
  return out;
}

}  // namespace skembed
