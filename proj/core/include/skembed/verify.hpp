#pragma once

#include "skembed/costs.hpp"
#include "skembed/lp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace skembed {

struct ContactSet {
  std::vector<bool> mask;  ///< V - psi <= ctol
  Vec slack;               ///< V - psi per augmented state
  double ctol = 0.0;
};

/// Default contact tolerance 1e-7 * (1 + |V|).
double default_contact_tol(const Vec& v);

ContactSet contact_set(const AugmentedChain& aug, const Vec& psi, const Vec& v, std::optional<double> ctol = {});

/// Stop exactly on the mask.
StoppingRule hitting_rule(const ContactSet& contact);

struct Pushforward {
  OccupationSolution occ;
  Vec law;              ///< stopped law on base states
  double killed = 0.0;  ///< mass reaching the cemetery
  double expected_time = 0.0;
  double expected_cost = 0.0;           ///< S_0 + sum u l
  std::optional<double> terminal_cost;  ///< E[Lambda(A_T, X_T)] from the tables
  double residual = 0.0;
};

/// Exact law of a memoryless rule: (I - P_aug' diag(1 - p)) r = mu~,
/// s = p r, u = (1 - p) r. Throws MassLeak when the solve fails or loses mass.
Pushforward pushforward(const AugmentedChain& aug, const CostModel& cost, const StoppingRule& rule, const Measure& mu);
Pushforward pushforward(const AugmentedChain& aug, const CostModel& cost, const StoppingRule& rule, const Vec& mu_aug);

struct OptimalityReport {
  double ctol = 0.0;
  bool support_in_contact = true;
  double worst_support_slack = 0.0;
  std::optional<std::size_t> worst_support_state;
  bool martingale = true;
  double sum_u_alpha = 0.0;
  std::optional<std::size_t> worst_alpha_state;
  bool zero_gap = true;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;

  bool pass() const { return support_in_contact && martingale && zero_gap; }
};

/// Checks (1) stopped support inside the contact set, (2) sum u alpha <= tol,
/// (3) primal - U(psi) <= tol, with U evaluated against the stopped law of occ.
OptimalityReport verify_optimality(const AugmentedChain& aug, const CostModel& cost, const Measure& mu,
                                   const Vec& psi, const Vec& v, const OccupationSolution& occ, double tol = 1e-8);

struct StopGoViolation {
  std::size_t base = 0;
  std::size_t go = 0;    ///< augmented state with continuation mass
  std::size_t stop = 0;  ///< augmented state with stopped mass
  double excess = 0.0;   ///< C(stop) - C(go)
};

struct StopGoReport {
  std::size_t pairs_checked = 0;
  double slack = 0.0;
  std::vector<StopGoViolation> violations;
  bool pass() const { return violations.empty(); }
};

/// One-step stop-go audit. With C = P_aug V - l, a go state a1 and a stop
/// state a2 over the same base state must satisfy C(a2) <= C(a1) + slack.
StopGoReport check_stop_go(const AugmentedChain& aug, const CostModel& cost, const Vec& v,
                           const OccupationSolution& occ, double mass_tol = 1e-9);

struct LocalTimeReport {
  double visits = 0.0;
  bool optimal = false;
};

/// Expected continuation visits at x before stopping; zero at a halting point.
LocalTimeReport local_time_check(const OccupationSolution& occ, std::size_t x, double tol = 1e-9);

/// Lowers psi at nu-null base states below the never-stop value, so no state
/// outside supp(nu) touches the contact set. U(psi) is unchanged.
Vec sharpen_dual(const AugmentedChain& aug, const CostModel& cost, const Measure& nu, const Vec& psi);

struct BarrierReport {
  bool twist_holds = false;
  std::size_t axis = 0;
  int direction = 0;
  bool bang_bang = true;
  double worst_fraction = 0.0;  ///< most randomized p on visited states
  bool monotone = true;
  std::vector<std::pair<std::size_t, std::size_t>> monotone_violations;  ///< (stopped, continued)
  /// hitting-rule mask on reachable states; horizon rows of a Time auxiliary
  /// are excluded from the monotonicity check
  std::vector<bool> stopped;
  double nu_error = 0.0;
  double cost_error = 0.0;
  bool reproduces_nu = false;
  bool reproduces_cost = false;
  double lp_distance = 0.0;  ///< sup difference between LP and hitting-rule occupations
  bool agrees_with_lp = false;
  std::string caveat;

  bool pass() const { return twist_holds && bang_bang && monotone && reproduces_nu && reproduces_cost; }
};

BarrierReport barrier_report(const AugmentedChain& aug, const CostModel& cost, const Measure& mu, const Measure& nu,
                             const Vec& psi, const Vec& v, const OccupationSolution& occ, const TwistReport& twist);

struct RegularizedTime {
  std::vector<double> betas;
  std::vector<double> expected_times;
  std::vector<double> killed;
  double extrapolated = 0.0;  ///< Richardson estimate from the two smallest betas
  double reference = 0.0;
  double error = 0.0;
};

/// Runs a base-chain stopping rule on the killed chains (1 - beta) P and
/// extrapolates E[T] to beta = 0.
RegularizedTime regularized_expected_time(const Chain& chain, const StoppingRule& rule, const Measure& mu,
                                          const std::vector<double>& betas, double reference);

}  // namespace skembed
