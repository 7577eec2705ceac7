#pragma once

#include "skembed/costs.hpp"

namespace skembed {

struct SnellOptions {
  double tol = 1e-13;  ///< sweep stops when sup-change <= tol * (1 + |V|)
  std::size_t max_sweeps = 1000000;
  std::size_t polish_every = 2000;
};

/// Shifted value V = H + Lambda on augmented states; cemetery value 0.
struct ValueFunction {
  Vec v;
  std::size_t sweeps = 0;
  double residual = 0.0;
  bool polished = false;
};

/// psi read at the base coordinate of every augmented state.
Vec lift_potential(const AugmentedChain& aug, const Vec& psi);

/// Fixed point of V = max(psi o x, P_aug V - l). Requires an absorbing base
/// chain or a horizon-truncated Time auxiliary.
ValueFunction snell_envelope(const AugmentedChain& aug, const CostModel& cost, const Vec& psi,
                             const SnellOptions& opts = {});

/// P_aug V - l: the value of continuing one step.
Vec continuation_value(const AugmentedChain& aug, const CostModel& cost, const Vec& v);

/// sup |V - max(psi, P_aug V - l)|.
double snell_residual(const AugmentedChain& aug, const CostModel& cost, const Vec& psi, const Vec& v);

/// Predictable increments alpha = V - (P_aug V - l). Throws NegativeIncrement
/// below -tol.
Vec doob_meyer(const AugmentedChain& aug, const CostModel& cost, const Vec& v, double tol = 1e-10);

struct NormalizedPotential {
  Vec psi_bar;  ///< psi - reduite(psi), <= 0
  Vec reduite;
};

/// Subtracts the base-chain reduite. Requires the cost to pass the
/// submartingale check.
NormalizedPotential normalize_psi(const AugmentedChain& aug, const CostModel& cost, const Vec& psi);

/// psi_max(y) = min of V(a, y) over augmented states reachable from the
/// support of mu_aug; 0 where no such state exists.
Vec psi_max(const AugmentedChain& aug, const Vec& mu_aug, const Vec& v);

}  // namespace skembed
