#include "skembed/verify.hpp"

#include "skembed/error.hpp"
#include "skembed/snell.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace skembed {

double default_contact_tol(const Vec& v) { return 1e-7 * (1.0 + sup_norm(v)); }

ContactSet contact_set(const AugmentedChain& aug, const Vec& psi, const Vec& v, std::optional<double> ctol) {
  ContactSet c;
  c.ctol = ctol ? *ctol : default_contact_tol(v);
  c.slack = v - lift_potential(aug, psi);
  c.mask.resize(aug.size());
  for (std::size_t z = 0; z < aug.size(); ++z) c.mask[z] = c.slack(static_cast<Eigen::Index>(z)) <= c.ctol;
  return c;
}

StoppingRule hitting_rule(const ContactSet& contact) {
  StoppingRule r;
  r.p.resize(static_cast<Eigen::Index>(contact.mask.size()));
  for (std::size_t z = 0; z < contact.mask.size(); ++z) r.p(static_cast<Eigen::Index>(z)) = contact.mask[z] ? 1.0 : 0.0;
  r.deterministic = true;
  return r;
}

Pushforward pushforward(const AugmentedChain& aug, const CostModel& cost, const StoppingRule& rule, const Measure& mu) {
  return pushforward(aug, cost, rule, lift_initial(aug, mu));
}

Pushforward pushforward(const AugmentedChain& aug, const CostModel& cost, const StoppingRule& rule, const Vec& mu_aug) {
  const auto nz = static_cast<Eigen::Index>(aug.size());
  if (rule.p.size() != nz || mu_aug.size() != nz) throw Error(ErrorCode::DimensionMismatch, "rule length mismatch");
  const Vec go = Vec::Ones(nz) - rule.p;
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t z = 0; z < aug.size(); ++z) {
    const auto col = static_cast<Eigen::Index>(z);
    entries.emplace_back(col, col, 1.0);
    for (const auto& t : aug.row(z)) entries.emplace_back(static_cast<Eigen::Index>(t.to), col, -t.prob * go(col));
  }
  SpMat a(nz, nz);
  a.setFromTriplets(entries.begin(), entries.end());
  Pushforward out;
  Vec r;
  try {
    r = solve_sparse(a, mu_aug);
  } catch (const Error& e) {
    throw Error(ErrorCode::MassLeak, std::string("arrival system is singular; the rule never stops mass: ") + e.detail());
  }
  out.occ.s = rule.p.cwiseProduct(r);
  out.occ.u = go.cwiseProduct(r);
  out.occ.killed_mass = out.occ.u.dot(aug.kill_vector());
  out.killed = out.occ.killed_mass;
  out.law = project_base(aug, out.occ.s);
  out.expected_time = out.occ.u.sum();
  double s0 = 0.0;
  for (std::size_t z = 0; z < aug.size(); ++z) s0 += mu_aug(static_cast<Eigen::Index>(z)) * cost.start_value(z);
  out.expected_cost = s0 + out.occ.u.dot(cost.lagrangian);
  out.occ.objective = out.expected_cost;
  if (cost.lambda) {
    out.terminal_cost = out.occ.s.dot(*cost.lambda) + out.occ.u.cwiseProduct(aug.kill_vector()).dot(*cost.lambda_cemetery);
  }
  out.residual = std::max(sup_norm(a * r - mu_aug), std::abs(out.law.sum() + out.killed - mu_aug.sum()));
  if (!(out.residual <= 1e-9) || (r.array() < -1e-9).any()) {
    std::ostringstream os;
    os << "pushforward residual " << out.residual;
    throw Error(ErrorCode::MassLeak, os.str());
  }
  return out;
}

OptimalityReport verify_optimality(const AugmentedChain& aug, const CostModel& cost, const Measure& mu,
                                   const Vec& psi, const Vec& v, const OccupationSolution& occ, double tol) {
  OptimalityReport rep;
  const auto contact = contact_set(aug, psi, v);
  rep.ctol = contact.ctol;
  const Vec alpha = v - continuation_value(aug, cost, v);
  for (std::size_t z = 0; z < aug.size(); ++z) {
    const auto i = static_cast<Eigen::Index>(z);
    if (occ.s(i) > 1e-9 && contact.slack(i) > rep.worst_support_slack) {
      rep.worst_support_slack = contact.slack(i);
      rep.worst_support_state = z;
    }
  }
  rep.support_in_contact = rep.worst_support_slack <= contact.ctol;
  if (rep.support_in_contact) rep.worst_support_state.reset();

  double worst = 0.0;
  for (std::size_t z = 0; z < aug.size(); ++z) {
    const auto i = static_cast<Eigen::Index>(z);
    const double term = occ.u(i) * alpha(i);
    rep.sum_u_alpha += term;
    if (term > worst) {
      worst = term;
      rep.worst_alpha_state = z;
    }
  }
  rep.martingale = rep.sum_u_alpha <= tol;
  if (rep.martingale) rep.worst_alpha_state.reset();

  const Vec mu_aug = lift_initial(aug, mu);
  double s0 = 0.0;
  for (std::size_t z = 0; z < aug.size(); ++z) s0 += mu_aug(static_cast<Eigen::Index>(z)) * cost.start_value(z);
  const Vec law = project_base(aug, occ.s);
  rep.primal = s0 + occ.u.dot(cost.lagrangian);
  rep.dual = law.dot(psi) - mu_aug.dot(v) + s0;
  rep.gap = rep.primal - rep.dual;
  rep.zero_gap = std::abs(rep.gap) <= tol;
  return rep;
}

StopGoReport check_stop_go(const AugmentedChain& aug, const CostModel& cost, const Vec& v,
                           const OccupationSolution& occ, double mass_tol) {
  StopGoReport rep;
  rep.slack = 1e-9 * (1.0 + sup_norm(v));
  const Vec c = continuation_value(aug, cost, v);
  const std::size_t n = aug.base().size();
  std::vector<std::vector<std::size_t>> go(n), stop(n);
  for (std::size_t z = 0; z < aug.size(); ++z) {
    const auto i = static_cast<Eigen::Index>(z);
    if (occ.u(i) > mass_tol) go[aug.base_of(z)].push_back(z);
    if (occ.s(i) > mass_tol) stop[aug.base_of(z)].push_back(z);
  }
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t a1 : go[x]) {
      for (std::size_t a2 : stop[x]) {
        ++rep.pairs_checked;
        const double excess = c(static_cast<Eigen::Index>(a2)) - c(static_cast<Eigen::Index>(a1));
        if (excess > rep.slack) rep.violations.push_back({x, a1, a2, excess});
      }
    }
  }
  return rep;
}

LocalTimeReport local_time_check(const OccupationSolution& occ, std::size_t x, double tol) {
  LocalTimeReport rep;
  rep.visits = occ.u(static_cast<Eigen::Index>(x));
  rep.optimal = rep.visits <= tol;
  return rep;
}

Vec sharpen_dual(const AugmentedChain& aug, const CostModel& cost, const Measure& nu, const Vec& psi) {
  const auto nz = static_cast<Eigen::Index>(aug.size());
  // Value of never stopping: a lower bound for every envelope.
  const Vec never = solve_dense(Mat::Identity(nz, nz) - aug.kernel(), -cost.lagrangian);
  const double floor = never.minCoeff() - 1.0;
  Vec out = psi;
  for (Eigen::Index x = 0; x < out.size(); ++x)
    if (nu.mass(x) <= 0.0) out(x) = std::min(out(x), floor);
  return out;
}

BarrierReport barrier_report(const AugmentedChain& aug, const CostModel& cost, const Measure& mu, const Measure& nu,
                             const Vec& psi, const Vec& v, const OccupationSolution& occ, const TwistReport& twist) {
  BarrierReport rep;
  rep.twist_holds = twist.status == TwistStatus::Holds;
  rep.axis = twist.axis;
  rep.direction = twist.sign;
  rep.caveat =
      "uniqueness is evidenced by agreement of the LP vertex with the hitting rule, not proven; "
      "the differentiability condition on the value in the auxiliary coordinate is not checked";

  const StoppingRule lp_rule = extract_stopping_rule(occ);
  for (Eigen::Index z = 0; z < occ.s.size(); ++z) {
    if (occ.s(z) + occ.u(z) <= 1e-9) continue;
    const double frac = std::min(lp_rule.p(z), 1.0 - lp_rule.p(z));
    rep.worst_fraction = std::max(rep.worst_fraction, frac);
  }
  rep.bang_bang = rep.worst_fraction <= 1e-9;

  const Vec mu_aug = lift_initial(aug, mu);
  const auto reach = reachable_from(aug, mu_aug);
  const auto contact = contact_set(aug, psi, v);
  rep.stopped.assign(aug.size(), false);
  for (std::size_t z = 0; z < aug.size(); ++z) rep.stopped[z] = reach[z] && contact.mask[z];

  if (rep.twist_holds && aug.aux_dim() > 0) {
    const auto k = static_cast<Eigen::Index>(twist.axis);
    for (std::size_t z1 = 0; z1 < aug.size(); ++z1) {
      if (!rep.stopped[z1] || aug.truncated(z1)) continue;
      const Vec& c1 = aug.aux_coord(aug.aux_of(z1));
      for (std::size_t z2 = 0; z2 < aug.size(); ++z2) {
        if (!reach[z2] || aug.truncated(z2) || rep.stopped[z2] || aug.base_of(z2) != aug.base_of(z1)) continue;
        Vec d = aug.aux_coord(aug.aux_of(z2)) - c1;
        const double step = d(k);
        d(k) = 0.0;
        if (d.cwiseAbs().maxCoeff() > 0.0) continue;
        if (twist.sign * step > 0.0) {
          rep.monotone = false;
          rep.monotone_violations.emplace_back(z1, z2);
        }
      }
    }
  }

  const auto hit = pushforward(aug, cost, hitting_rule(contact), mu_aug);
  rep.nu_error = sup_norm(hit.law - nu.mass);
  rep.nu_error = std::max(rep.nu_error, std::abs(hit.killed - nu.cemetery));
  rep.reproduces_nu = rep.nu_error <= 1e-10;
  rep.cost_error = std::abs(hit.expected_cost - occ.objective);
  rep.reproduces_cost = rep.cost_error <= 1e-8;
  rep.lp_distance = std::max(sup_norm(hit.occ.u - occ.u), sup_norm(hit.occ.s - occ.s));
  rep.agrees_with_lp = rep.lp_distance <= 1e-8;
  return rep;
}

RegularizedTime regularized_expected_time(const Chain& chain, const StoppingRule& rule, const Measure& mu,
                                          const std::vector<double>& betas, double reference) {
  if (betas.size() < 2) throw Error(ErrorCode::InputError, "extrapolation needs at least two killing rates");
  RegularizedTime out;
  out.betas = betas;
  out.reference = reference;
  for (double beta : betas) {
    const Chain killed = regularize(chain, beta);
    const auto aug = build_augmented(killed, TrivialAux{});
    const CostModel unit = running_cost(aug, Vec::Ones(static_cast<Eigen::Index>(aug.size())));
    const auto pf = pushforward(aug, unit, rule, mu);
    out.expected_times.push_back(pf.expected_time);
    out.killed.push_back(pf.killed);
  }
  // First-order extrapolation through the two smallest rates.
  std::vector<std::size_t> order(betas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return betas[i] < betas[j]; });
  const double b1 = betas[order[1]], b2 = betas[order[0]];
  const double e1 = out.expected_times[order[1]], e2 = out.expected_times[order[0]];
  out.extrapolated = (b1 * e2 - b2 * e1) / (b1 - b2);
  out.error = std::abs(out.extrapolated - reference);
  return out;
}

}  // namespace skembed
