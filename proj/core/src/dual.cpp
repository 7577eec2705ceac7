#include "skembed/dual.hpp"

#include "skembed/error.hpp"
#include "skembed/snell.hpp"
#include "skembed/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace skembed {

namespace {

double start_cost(const AugmentedChain& aug, const CostModel& cost, const Vec& mu_aug) {
  double s = 0.0;
  for (std::size_t z = 0; z < aug.size(); ++z) s += mu_aug(static_cast<Eigen::Index>(z)) * cost.start_value(z);
  return s;
}

double value_from(const AugmentedChain& aug, const CostModel& cost, const Vec& mu_aug, const Measure& nu,
                  const Vec& psi, const Vec& v) {
  return nu.mass.dot(psi) - mu_aug.dot(v) + start_cost(aug, cost, mu_aug);
}

}  // namespace

double dual_value(const AugmentedChain& aug, const CostModel& cost, const Measure& mu, const Measure& nu,
                  const Vec& psi) {
  const Vec mu_aug = lift_initial(aug, mu);
  const Vec v = snell_envelope(aug, cost, psi).v;
  return value_from(aug, cost, mu_aug, nu, psi, v);
}

Supergradient supergradient(const AugmentedChain& aug, const CostModel& cost, const Measure& mu, const Measure& nu,
                            const Vec& psi, double contact_tol) {
  const Vec mu_aug = lift_initial(aug, mu);
  Supergradient out;
  out.v = snell_envelope(aug, cost, psi).v;
  out.value = value_from(aug, cost, mu_aug, nu, psi, out.v);
  const auto contact = contact_set(aug, psi, out.v, contact_tol);
  const auto pf = pushforward(aug, cost, hitting_rule(contact), mu_aug);
  out.law = pf.law;
  out.killed = pf.killed;
  out.g = nu.mass - pf.law;
  out.g_cemetery = nu.cemetery - pf.killed;
  return out;
}

double choose_K(const AugmentedChain& aug, const CostModel& cost) {
  const auto reach = reachable_from_initial(aug);
  if (cost.lambda) {
    double k = 0.0;
    for (std::size_t z = 0; z < aug.size(); ++z) {
      if (!reach[z]) continue;
      k = std::max(k, (*cost.lambda)(static_cast<Eigen::Index>(z)));
      k = std::max(k, (*cost.lambda_cemetery)(static_cast<Eigen::Index>(z)));
    }
    return k;
  }
  const double d_star = check_semi_supermartingale(aug, cost).d_star;
  double lifetime = 0.0;
  if (aug.base().mode() == Mode::Absorbing) {
    lifetime = expected_lifetime(aug.base()).maxCoeff();
  } else {
    lifetime = static_cast<double>(aug.horizon() + 1);
  }
  return std::max(0.0, d_star) * lifetime * 10.0;
}

DualResult solve_dual_iterative(const AugmentedChain& aug, const CostModel& cost, const Measure& mu, const Measure& nu,
                                const DualOptions& opts) {
  const Vec mu_aug = lift_initial(aug, mu);
  const auto n = static_cast<Eigen::Index>(aug.base().size());
  DualResult out;
  out.k_box = opts.k_box ? *opts.k_box : choose_K(aug, cost);
  const double k = out.k_box;
  auto clamp = [k](Vec psi) { return psi.cwiseMax(-k).cwiseMin(0.0); };

  const double eta0 = k / (1.0 + (nu.mass - mu.mass).lpNorm<1>() + std::abs(nu.cemetery - mu.cemetery));
  Vec psi = Vec::Zero(n);
  double best = -std::numeric_limits<double>::infinity();
  auto done = [&](double value) { return opts.target && std::abs(*opts.target - value) <= opts.tol; };

  for (std::size_t it = 0;; ++it) {
    auto sg = supergradient(aug, cost, mu, nu, psi);
    out.history.push_back(sg.value);
    if (sg.value > best) {
      best = sg.value;
      out.psi = psi;
      out.value = sg.value;
    }
    out.iterations = it;
    if (done(best)) {
      out.converged = true;
      break;
    }
    if (it >= opts.max_iterations) break;

    const double gnorm2 = sg.g.squaredNorm() + sg.g_cemetery * sg.g_cemetery;
    if (gnorm2 == 0.0) {
      // Zero supergradient: psi is a maximizer.
      out.converged = !opts.target || done(sg.value);
      break;
    }
    double eta = eta0 / std::sqrt(static_cast<double>(it + 1));
    if (opts.step == StepRule::Polyak && opts.target) eta = std::max(*opts.target - sg.value, 0.0) / gnorm2;
    psi = clamp(psi + eta * sg.g);

    if (opts.polish_every && (it + 1) % opts.polish_every == 0) {
      const double before = dual_value(aug, cost, mu, nu, psi);
      Vec polished = normalize_psi(aug, cost, psi).psi_bar;
      const Vec v = snell_envelope(aug, cost, polished).v;
      polished = clamp(psi_max(aug, mu_aug, v));
      const double after = dual_value(aug, cost, mu, nu, polished);
      out.worst_polish_loss = std::max(out.worst_polish_loss, before - after);
      if (after >= before - 1e-10) psi = polished;
    }
  }
  if (opts.target) out.gap = *opts.target - out.value;
  out.touches_lower_box = k > 0.0 && (out.psi.array() <= -k + 1e-9).any();
  return out;
}

}  // namespace skembed
