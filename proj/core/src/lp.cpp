#include "skembed/lp.hpp"

#include "skembed/error.hpp"
#include "skembed/snell.hpp"

#include <cmath>
#include <sstream>

namespace skembed {

namespace {

double start_cost(const AugmentedChain& aug, const CostModel& cost, const Vec& mu_aug) {
  double s = 0.0;
  for (std::size_t z = 0; z < aug.size(); ++z) s += mu_aug(static_cast<Eigen::Index>(z)) * cost.start_value(z);
  return s;
}

}  // namespace

EmbeddingLpResult solve_embedding_lp(const AugmentedChain& aug, const Vec& mu_aug, const Vec& nu_mass,
                                     const Vec& cost_u, const Vec& cost_s, const SimplexOptions& opts) {
  const auto nz = static_cast<Eigen::Index>(aug.size());
  const auto nb = static_cast<Eigen::Index>(aug.base().size());
  if (mu_aug.size() != nz || cost_u.size() != nz || cost_s.size() != nz || nu_mass.size() != nb) {
    throw Error(ErrorCode::DimensionMismatch, "embedding LP inputs have inconsistent sizes");
  }
  LinearProgram lp;
  lp.a = Mat::Zero(nz + nb, 2 * nz);
  lp.a.topLeftCorner(nz, nz) = Mat::Identity(nz, nz) - aug.kernel().transpose();
  lp.a.topRightCorner(nz, nz) = Mat::Identity(nz, nz);
  for (Eigen::Index z = 0; z < nz; ++z) lp.a(nz + static_cast<Eigen::Index>(aug.base_of(static_cast<std::size_t>(z))), nz + z) = 1.0;
  lp.b.resize(nz + nb);
  lp.b << mu_aug, nu_mass;
  lp.rows.assign(static_cast<std::size_t>(nz + nb), RowType::Equal);
  lp.c.resize(2 * nz);
  lp.c << cost_u, cost_s;

  const LpResult res = solve_lp(lp, opts);
  EmbeddingLpResult out;
  out.status = res.status;
  out.iterations = res.iterations;
  if (res.status == LpStatus::Infeasible) {
    EmbeddingCertificate cert;
    cert.w = -res.farkas.head(nz);
    cert.phi = res.farkas.tail(nb);
    cert.violation = check_farkas(lp, res.farkas).yb;
    out.certificate = std::move(cert);
    return out;
  }
  if (res.status == LpStatus::Unbounded) return out;
  out.occ.u = res.x.head(nz);
  out.occ.s = res.x.tail(nz);
  out.occ.killed_mass = out.occ.u.dot(aug.kill_vector());
  out.occ.objective = res.objective;
  out.y_balance = res.duals.head(nz);
  out.y_marginal = res.duals.tail(nb);
  return out;
}

EmbeddingLpResult primal_embedding_lp(const AugmentedChain& aug, const CostModel& cost, const Measure& mu,
                                      const Measure& nu, const SimplexOptions& opts) {
  check_measure(aug.base(), mu, "mu");
  if (nu.size() != aug.base().size()) throw Error(ErrorCode::DimensionMismatch, "target law length mismatch");
  const Vec mu_aug = lift_initial(aug, mu);
  const Vec zero = Vec::Zero(static_cast<Eigen::Index>(aug.size()));
  auto out = solve_embedding_lp(aug, mu_aug, nu.mass, cost.lagrangian, zero, opts);
  if (out.status == LpStatus::Infeasible) {
    std::ostringstream os;
    os << "no stopping rule embeds nu; Farkas violation " << (out.certificate ? out.certificate->violation : 0.0);
    throw Error(ErrorCode::Infeasible, os.str());
  }
  if (out.status == LpStatus::Unbounded) {
    throw Error(ErrorCode::Unbounded, "embedding LP unbounded; the chain does not have a finite lifetime");
  }
  out.occ.objective += start_cost(aug, cost, mu_aug);
  return out;
}

DualExtraction dual_from_lp(const AugmentedChain& aug, const CostModel& cost, const Measure& mu, const Measure& nu,
                            const EmbeddingLpResult& lp, double gap_tol) {
  if (lp.status != LpStatus::Optimal) throw Error(ErrorCode::InputError, "dual extraction needs an optimal LP");
  const Vec mu_aug = lift_initial(aug, mu);
  const double s0 = start_cost(aug, cost, mu_aug);
  DualExtraction out;
  out.psi = lp.y_marginal;
  for (Eigen::Index x = 0; x < out.psi.size(); ++x)
    if (out.psi(x) > 0.0 && out.psi(x) <= 1e-9) out.psi(x) = 0.0;
  out.v_lp = -lp.y_balance;
  out.primal = lp.occ.objective;
  out.dual_lp = nu.mass.dot(out.psi) - mu_aug.dot(out.v_lp) + s0;
  out.v_snell = snell_envelope(aug, cost, out.psi).v;
  out.value = nu.mass.dot(out.psi) - mu_aug.dot(out.v_snell) + s0;
  out.gap = out.primal - out.value;
  if (!(std::abs(out.gap) <= gap_tol)) {
    std::ostringstream os;
    os << "primal " << out.primal << " vs dual " << out.value;
    throw Error(ErrorCode::GapTooLarge, os.str());
  }
  return out;
}

ComplementaryDual complementary_dual(const AugmentedChain& aug, const CostModel& cost, const Measure& mu,
                                     const Measure& nu, const EmbeddingLpResult& lp, double mass_tol,
                                     const SimplexOptions& opts) {
  if (lp.status != LpStatus::Optimal) throw Error(ErrorCode::InputError, "complementary dual needs an optimal LP");
  const auto nz = static_cast<Eigen::Index>(aug.size());
  const auto nb = static_cast<Eigen::Index>(aug.base().size());
  const Vec mu_aug = lift_initial(aug, mu);
  const double target = lp.occ.objective - start_cost(aug, cost, mu_aug);
  std::vector<Eigen::Index> free_states;
  for (Eigen::Index z = 0; z < nz; ++z)
    if (lp.occ.s(z) <= mass_tol) free_states.push_back(z);
  const auto k = static_cast<Eigen::Index>(free_states.size());

  // Columns: V+, V-, psi+, psi-, t.
  const Eigen::Index cv = 0, cpsi = 2 * nz, ct = 2 * nz + 2 * nb;
  LinearProgram dl;
  dl.a = Mat::Zero(2 * nz + k + 1, ct + k);
  dl.b = Vec::Zero(dl.a.rows());
  const Mat pm = aug.kernel() - Mat::Identity(nz, nz);
  dl.a.block(0, cv, nz, nz) = pm;
  dl.a.block(0, cv + nz, nz, nz) = -pm;
  dl.b.head(nz) = cost.lagrangian;
  for (Eigen::Index z = 0; z < nz; ++z) {
    const auto x = static_cast<Eigen::Index>(aug.base_of(static_cast<std::size_t>(z)));
    dl.a(nz + z, cpsi + x) = 1.0;
    dl.a(nz + z, cpsi + nb + x) = -1.0;
    dl.a(nz + z, cv + z) = -1.0;
    dl.a(nz + z, cv + nz + z) = 1.0;
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    dl.a(nz + free_states[static_cast<std::size_t>(i)], ct + i) = 1.0;
    dl.a(2 * nz + i, ct + i) = 1.0;
    dl.b(2 * nz + i) = 1.0;
  }
  const Eigen::Index last = 2 * nz + k;
  dl.a.block(last, cpsi, 1, nb) = nu.mass.transpose();
  dl.a.block(last, cpsi + nb, 1, nb) = -nu.mass.transpose();
  dl.a.block(last, cv, 1, nz) = -mu_aug.transpose();
  dl.a.block(last, cv + nz, 1, nz) = mu_aug.transpose();
  dl.b(last) = target - 1e-9 * (1.0 + std::abs(target));
  dl.rows.assign(static_cast<std::size_t>(last), RowType::LessEqual);
  dl.rows.push_back(RowType::GreaterEqual);
  dl.c = Vec::Zero(ct + k);
  dl.c.tail(k).setOnes();
  dl.sense = Sense::Maximize;

  const LpResult res = solve_lp(dl, opts);
  if (res.status != LpStatus::Optimal) {
    throw Error(ErrorCode::NumericalBreakdown, "optimal-dual face LP is " + std::string(to_string(res.status)));
  }
  ComplementaryDual out;
  out.v = res.x.segment(cv, nz) - res.x.segment(cv + nz, nz);
  out.psi = res.x.segment(cpsi, nb) - res.x.segment(cpsi + nb, nb);
  out.value = nu.mass.dot(out.psi) - mu_aug.dot(out.v);
  out.min_slack = k ? res.x.tail(k).minCoeff() : 0.0;
  return out;
}

OccupationSolution ergodic_filling_lp(const Chain& chain, const Measure& mu, const Measure& nu,
                                      const SimplexOptions& opts) {
  if (chain.mode() != Mode::Ergodic) throw Error(ErrorCode::NotErgodic, "filling LP needs an ergodic chain");
  check_measure(chain, mu, "mu");
  check_measure(chain, nu, "nu");
  const auto n = static_cast<Eigen::Index>(chain.size());
  LinearProgram lp;
  lp.a = Mat::Identity(n, n) - chain.kernel().transpose();
  lp.b = mu.mass - nu.mass;
  lp.rows.assign(static_cast<std::size_t>(n), RowType::Equal);
  lp.c = Vec::Ones(n);
  const LpResult res = solve_lp(lp, opts);
  if (res.status == LpStatus::Infeasible) {
    throw Error(ErrorCode::Infeasible, "filling LP infeasible on an irreducible chain");
  }
  if (res.status == LpStatus::Unbounded) throw Error(ErrorCode::Unbounded, "filling LP unbounded");
  OccupationSolution occ;
  occ.u = res.x;
  occ.s = nu.mass;
  occ.objective = res.objective;
  return occ;
}

StoppingRule extract_stopping_rule(const OccupationSolution& occ, double tol) {
  StoppingRule rule;
  rule.p = Vec::Ones(occ.s.size());
  for (Eigen::Index z = 0; z < occ.s.size(); ++z) {
    const double den = occ.s(z) + occ.u(z);
    if (den > 0.0) rule.p(z) = occ.s(z) / den;
    if (rule.p(z) > tol && rule.p(z) < 1.0 - tol) rule.deterministic = false;
  }
  return rule;
}

}  // namespace skembed
