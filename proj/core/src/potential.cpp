#include "skembed/potential.hpp"

#include "obstacle.hpp"
#include "skembed/error.hpp"
#include "skembed/lp.hpp"

#include <cmath>

namespace skembed {

Vec reduite(const Chain& chain, const Vec& psi) {
  if (psi.size() != static_cast<Eigen::Index>(chain.size())) {
    throw Error(ErrorCode::DimensionMismatch, "potential length does not match the chain");
  }
  if (chain.mode() == Mode::Ergodic) return Vec::Constant(psi.size(), psi.maxCoeff());
  const detail::SparseKernel p(chain.kernel());
  return detail::solve_obstacle(p, psi, Vec::Zero(psi.size()), {}).v;
}

bool is_supermedian(const Chain& chain, const Vec& phi, double tol) {
  if (phi.size() != static_cast<Eigen::Index>(chain.size())) {
    throw Error(ErrorCode::DimensionMismatch, "function length does not match the chain");
  }
  return ((chain.kernel() * phi - phi).array() <= tol).all();
}

BalayageResult check_balayage(const Chain& chain, const Measure& mu, const Measure& nu) {
  check_measure(chain, mu, "mu");
  check_measure(chain, nu, "nu");
  BalayageResult out;
  if (chain.mode() == Mode::Ergodic) {
    out.ordered = nu.cemetery == 0.0;
    out.ergodic = true;
    return out;
  }
  const auto aug = build_augmented(chain, TrivialAux{});
  const Vec mu_aug = lift_initial(aug, mu);
  const Vec zero = Vec::Zero(static_cast<Eigen::Index>(aug.size()));
  const auto lp = solve_embedding_lp(aug, mu_aug, nu.mass, zero, zero);
  if (lp.status == LpStatus::Optimal) {
    out.ordered = true;
    return out;
  }
  if (!lp.certificate) throw Error(ErrorCode::NumericalBreakdown, "infeasible embedding LP without certificate");
  Vec phi = reduite(chain, lp.certificate->phi);
  const double scale = sup_norm(phi);
  if (scale > 0.0) phi /= scale;
  out.gap = nu.mass.dot(phi) - mu.mass.dot(phi);
  out.verified = is_supermedian(chain, phi) && out.gap >= 1e-9;
  out.certificate = std::move(phi);
  return out;
}

Vec time_potential(const Chain& chain) { return -expected_lifetime(chain); }

double expected_embedding_time(const Chain& chain, const Measure& mu, const Measure& nu) {
  const auto bal = check_balayage(chain, mu, nu);
  if (!bal.ordered) throw Error(ErrorCode::NotOrdered, "mu does not precede nu in balayage order");
  const Vec h = time_potential(chain);
  return nu.mass.dot(h) - mu.mass.dot(h);
}

Vec ergodic_potential(const Chain& chain, const Measure& sigma) {
  if (chain.mode() != Mode::Ergodic) throw Error(ErrorCode::NotErgodic, "ergodic potential needs an ergodic chain");
  check_measure(chain, sigma, "sigma");
  const Vec gamma = invariant_distribution(chain).mass;
  const auto n = gamma.size();
  for (Eigen::Index x = 0; x < n; ++x) {
    if (!(gamma(x) > 1e-300)) {
      throw Error(ErrorCode::ZeroGammaState, "invariant law vanishes at state " + chain.label(static_cast<std::size_t>(x)));
    }
  }
  // Bordered system [P - I, 1; gamma', 0] [U; c] = [1 - sigma/gamma; 0].
  Mat a = Mat::Zero(n + 1, n + 1);
  a.topLeftCorner(n, n) = chain.kernel() - Mat::Identity(n, n);
  a.topRightCorner(n, 1).setOnes();
  a.bottomLeftCorner(1, n) = gamma.transpose();
  Vec rhs = Vec::Zero(n + 1);
  rhs.head(n) = Vec::Ones(n) - sigma.mass.cwiseQuotient(gamma);
  return solve_dense(a, rhs).head(n);
}

Chain time_reversal(const Chain& chain) {
  const Vec g = invariant_distribution(chain).mass;
  const Mat& p = chain.kernel();
  Mat r(p.rows(), p.cols());
  for (Eigen::Index x = 0; x < p.rows(); ++x)
    for (Eigen::Index y = 0; y < p.cols(); ++y) r(x, y) = g(y) * p(y, x) / g(x);
  for (Eigen::Index x = 0; x < r.rows(); ++x) r.row(x) /= r.row(x).sum();
  return validate_chain(r, Mode::Ergodic, chain.labels());
}

ErgodicMinTime ergodic_min_time(const Chain& chain, const Measure& mu, const Measure& nu) {
  ErgodicMinTime out;
  const Chain rev = time_reversal(chain);
  out.u_mu = ergodic_potential(rev, mu);
  out.u_nu = ergodic_potential(rev, nu);
  const Vec diff = out.u_nu - out.u_mu;
  out.value = diff.maxCoeff();
  for (Eigen::Index x = 0; x < diff.size(); ++x) {
    if (diff(x) >= out.value - 1e-9) out.argmax.push_back(static_cast<std::size_t>(x));
  }
  out.halting_point = out.argmax.front();
  return out;
}

}  // namespace skembed
