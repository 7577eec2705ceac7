#pragma once

#include "skembed/costs.hpp"

#include <optional>
#include <vector>

namespace skembed {

/// U(psi) = int psi dnu - E^mu[G_0], with G_0 = V - Lambda at the initial states.
double dual_value(const AugmentedChain& aug, const CostModel& cost, const Measure& mu, const Measure& nu,
                  const Vec& psi);

struct Supergradient {
  Vec g;                    ///< nu - law(X_T*) on base states
  double g_cemetery = 0.0;  ///< nu(cemetery) - killed mass
  Vec law;
  double killed = 0.0;
  double value = 0.0;  ///< U(psi)
  Vec v;
};

/// Supergradient of U at psi from the hitting rule of {V - psi <= contact_tol}.
Supergradient supergradient(const AugmentedChain& aug, const CostModel& cost, const Measure& mu, const Measure& nu,
                            const Vec& psi, double contact_tol = 1e-9);

/// Lower box bound: the largest reachable Lambda for table costs, otherwise
/// D* * max expected lifetime * 10.
double choose_K(const AugmentedChain& aug, const CostModel& cost);

enum class StepRule { Diminishing, Polyak };

struct DualOptions {
  double tol = 1e-6;
  std::size_t max_iterations = 10000;
  std::size_t polish_every = 25;
  std::optional<double> target;  ///< LP optimum, for the gap stopping rule
  std::optional<double> k_box;
  StepRule step = StepRule::Diminishing;
};

struct DualResult {
  Vec psi;
  double value = 0.0;
  double gap = 0.0;  ///< target - value, when a target is known
  std::size_t iterations = 0;
  std::vector<double> history;
  double k_box = 0.0;
  bool touches_lower_box = false;
  bool converged = false;
  double worst_polish_loss = 0.0;  ///< max over polishes of U(before) - U(after)
};

/// Projected supergradient ascent over [-K, 0] with periodic normalization
/// and psi_max polishing. Returns the best iterate; `converged` is false when
/// the gap did not close within the iteration cap.
DualResult solve_dual_iterative(const AugmentedChain& aug, const CostModel& cost, const Measure& mu, const Measure& nu,
                                const DualOptions& opts = {});

}  // namespace skembed
