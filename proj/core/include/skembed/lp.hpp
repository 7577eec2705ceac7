#pragma once

#include "skembed/costs.hpp"
#include "skembed/simplex.hpp"

#include <optional>

namespace skembed {

/// Primal occupation variables of an embedding: u continues, s stops.
struct OccupationSolution {
  Vec u;
  Vec s;
  double killed_mass = 0.0;
  double objective = 0.0;

  double expected_time() const { return u.sum(); }
};

/// Memoryless randomized rule: stop at augmented state z with probability p(z).
struct StoppingRule {
  Vec p;
  bool deterministic = true;
};

/// Infeasible embedding LP together with the raw Farkas multipliers split by
/// constraint block: w = -y_balance is supermedian on the augmented chain and
/// phi = y_marginal satisfies phi(x) <= w(a, x).
struct EmbeddingCertificate {
  Vec w;
  Vec phi;
  double violation = 0.0;  ///< phi' nu - mu~' w, positive
};

struct EmbeddingLpResult {
  LpStatus status = LpStatus::Infeasible;
  OccupationSolution occ;
  Vec y_balance;   ///< multiplier per augmented state
  Vec y_marginal;  ///< multiplier per base state
  std::optional<EmbeddingCertificate> certificate;
  std::size_t iterations = 0;
};

/// min cost_u'u + cost_s's subject to u + s - P_aug'u = mu_aug,
/// sum_a s(a, x) = nu(x), u, s >= 0.
EmbeddingLpResult solve_embedding_lp(const AugmentedChain& aug, const Vec& mu_aug, const Vec& nu_mass,
                                     const Vec& cost_u, const Vec& cost_s, const SimplexOptions& opts = {});

/// The embedding LP with objective sum u * l, plus the constant S_0 term.
/// Throws Infeasible (with a message carrying the certificate violation) or
/// Unbounded.
EmbeddingLpResult primal_embedding_lp(const AugmentedChain& aug, const CostModel& cost, const Measure& mu,
                                      const Measure& nu, const SimplexOptions& opts = {});

struct DualExtraction {
  Vec psi;          ///< on base states, cemetery fixed at 0
  Vec v_lp;         ///< -y_balance
  Vec v_snell;      ///< independent envelope solve of psi
  double primal = 0.0;
  double dual_lp = 0.0;
  double value = 0.0;  ///< U(psi) from v_snell
  double gap = 0.0;    ///< primal - value
};

/// Reads psi and V off the LP multipliers and certifies the duality gap by an
/// independent Snell solve. Throws GapTooLarge above `gap_tol`.
DualExtraction dual_from_lp(const AugmentedChain& aug, const CostModel& cost, const Measure& mu, const Measure& nu,
                            const EmbeddingLpResult& lp, double gap_tol = 1e-8);

struct ComplementaryDual {
  Vec psi;
  Vec v;             ///< dual-feasible supersolution, equal to the envelope on visited states
  double value = 0.0;
  double min_slack = 0.0;  ///< smallest V - psi over states without stopped mass (capped at 1)
};

/// Among optimal duals, one maximizing sum min(V - psi, 1) over augmented
/// states with no stopped mass. When the optimal embedding is unique this is
/// strictly complementary, so the contact set of the returned psi is exactly
/// the stopped support on visited states.
ComplementaryDual complementary_dual(const AugmentedChain& aug, const CostModel& cost, const Measure& mu,
                                     const Measure& nu, const EmbeddingLpResult& lp, double mass_tol = 1e-9,
                                     const SimplexOptions& opts = {});

/// Ergodic minimal-time filling: min sum u subject to (I - P')u = mu - nu, u >= 0.
OccupationSolution ergodic_filling_lp(const Chain& chain, const Measure& mu, const Measure& nu,
                                      const SimplexOptions& opts = {});

/// p = s / (s + u) where the denominator is positive, else 1.
StoppingRule extract_stopping_rule(const OccupationSolution& occ, double tol = 1e-9);

}  // namespace skembed
