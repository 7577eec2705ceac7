#pragma once

#include "skembed/chain.hpp"

#include <optional>
#include <vector>

namespace skembed {

/// Least supermedian majorant of psi (cemetery value 0), by value iteration
/// from psi. On an ergodic chain the only supermedian functions are
/// constants, so the result is the constant max(psi).
Vec reduite(const Chain& chain, const Vec& psi);

/// P phi <= phi + tol componentwise (cemetery value 0).
bool is_supermedian(const Chain& chain, const Vec& phi, double tol = 1e-12);

struct BalayageResult {
  bool ordered = false;
  /// Supermedian phi with int phi dnu > int phi dmu, scaled to |phi| = 1.
  std::optional<Vec> certificate;
  double gap = 0.0;        ///< int phi dnu - int phi dmu
  bool verified = false;   ///< certificate re-checked as supermedian with gap >= 1e-9
  bool ergodic = false;    ///< decided by the ergodic rule, not by the LP
};

/// mu precedes nu in balayage order iff the embedding LP is feasible.
BalayageResult check_balayage(const Chain& chain, const Measure& mu, const Measure& nu);

/// h with (Delta h) = 1 and h(cemetery) = 0, i.e. minus the expected lifetime.
Vec time_potential(const Chain& chain);

/// int h dnu - int h dmu; E[T] of every embedding. Throws NotOrdered.
double expected_embedding_time(const Chain& chain, const Measure& mu, const Measure& nu);

/// U with (Delta U)(x) = 1 - sigma(x) / gamma(x) and sum U gamma = 0.
Vec ergodic_potential(const Chain& chain, const Measure& sigma);

/// P*(x, y) = gamma(y) P(y, x) / gamma(x). Equal to P for reversible chains.
Chain time_reversal(const Chain& chain);

struct ErgodicMinTime {
  double value = 0.0;
  std::size_t halting_point = 0;       ///< smallest maximizer
  std::vector<std::size_t> argmax;     ///< maximizers within 1e-9
  Vec u_mu;
  Vec u_nu;
};

/// max_x (U^nu - U^mu)(x), the least expected embedding time. The potentials
/// are those of the time-reversed chain; pairing U^sigma against nu - mu only
/// swaps sigma and nu when the chain is reversible.
ErgodicMinTime ergodic_min_time(const Chain& chain, const Measure& mu, const Measure& nu);

}  // namespace skembed
