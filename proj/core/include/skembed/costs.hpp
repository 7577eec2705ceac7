#pragma once

#include "skembed/chain.hpp"

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace skembed {

enum class AuxKind { Trivial, Time, InitialState, Explicit };

std::string_view to_string(AuxKind kind) noexcept;

/// A product state (a, x): auxiliary index and base state.
struct AugState {
  std::size_t aux = 0;
  std::size_t base = 0;
  friend bool operator==(const AugState&, const AugState&) = default;
};

struct Transition {
  std::size_t to;
  double prob;
};

// Auxiliary specifications accepted by build_augmented().
struct TrivialAux {};
struct TimeAux {
  std::optional<std::size_t> t_max;  ///< chosen from the survival tail when empty
  double tail_tol = 1e-9;
};
struct InitialStateAux {
  Measure mu;  ///< the frozen coordinate ranges over supp(mu)
};
struct ExplicitAux {
  std::vector<Vec> coords;               ///< embedded coordinate per aux value
  std::vector<AugState> states;          ///< augmented state list
  Mat kernel;                            ///< coupled kernel over `states`
  std::vector<std::optional<std::size_t>> initial;  ///< per base x, index into `states`
};
using AuxSpec = std::variant<TrivialAux, TimeAux, InitialStateAux, ExplicitAux>;

/// Product chain (A_t, X_t) whose base marginal is the underlying chain.
/// Rows flagged as truncated are the forced-kill horizon rows of a Time
/// auxiliary; they are the only rows allowed to deviate from the base kill
/// probability.
class AugmentedChain {
 public:
  const Chain& base() const noexcept { return base_; }
  AuxKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return states_.size(); }
  std::size_t aux_count() const noexcept { return coords_.size(); }
  std::size_t aux_dim() const noexcept { return coords_.empty() ? 0 : static_cast<std::size_t>(coords_.front().size()); }
  const Vec& aux_coord(std::size_t a) const { return coords_.at(a); }

  const AugState& state(std::size_t z) const { return states_.at(z); }
  std::size_t base_of(std::size_t z) const { return states_[z].base; }
  std::size_t aux_of(std::size_t z) const { return states_[z].aux; }
  std::optional<std::size_t> find(std::size_t aux, std::size_t base) const;

  const Mat& kernel() const noexcept { return kernel_; }
  std::span<const Transition> row(std::size_t z) const {
    return {transitions_.data() + row_start_[z], row_start_[z + 1] - row_start_[z]};
  }
  double kill(std::size_t z) const { return kill_(static_cast<Eigen::Index>(z)); }
  const Vec& kill_vector() const noexcept { return kill_; }
  bool truncated(std::size_t z) const { return truncated_.at(z); }

  /// Augmented index of (a0(x), x), if x may start the process.
  std::optional<std::size_t> initial_state(std::size_t x) const { return initial_.at(x); }

  /// Time auxiliary: horizon T_max and the surviving mass routed to the
  /// cemetery at the horizon (max over start states).
  std::size_t horizon() const noexcept { return horizon_; }
  double truncation_mass() const noexcept { return truncation_mass_; }
  bool horizon_too_small() const noexcept { return horizon_too_small_; }

  std::string label(std::size_t z) const;

 private:
  friend AugmentedChain build_augmented(const Chain& base, const AuxSpec& spec);

  AugmentedChain(const Chain& base, AuxKind kind);
  void finalize();

  Chain base_;
  AuxKind kind_;
  std::vector<Vec> coords_;
  std::vector<AugState> states_;
  std::vector<std::size_t> index_;  // aux * n + base -> z, or npos
  Mat kernel_;
  Vec kill_;
  std::vector<bool> truncated_;
  std::vector<std::optional<std::size_t>> initial_;
  std::vector<Transition> transitions_;
  std::vector<std::size_t> row_start_;
  std::size_t horizon_ = 0;
  double truncation_mass_ = 0.0;
  bool horizon_too_small_ = false;
};

AugmentedChain build_augmented(const Chain& base, const AuxSpec& spec);

/// Worst deviation between summed auxiliary targets and the base kernel over
/// non-truncated rows.
double marginal_residual(const AugmentedChain& aug);

/// Lifts a base initial law to the augmented initial law.
Vec lift_initial(const AugmentedChain& aug, const Measure& mu);

/// Sums an augmented table over auxiliary coordinates.
Vec project_base(const AugmentedChain& aug, const Vec& per_state);

/// States reachable along positive-probability edges from the support of
/// `start` (an augmented law).
std::vector<bool> reachable_from(const AugmentedChain& aug, const Vec& start);

/// States reachable from every defined initial state.
std::vector<bool> reachable_from_initial(const AugmentedChain& aug);

/// Cost S_t = Lambda(A_t, X_t), or a running cost given directly by its
/// per-step Lagrangian. All tables are indexed by augmented state.
struct CostModel {
  Vec lagrangian;
  std::optional<Vec> lambda;
  std::optional<Vec> lambda_cemetery;  ///< cost frozen at death when killed from z
  std::optional<Mat> grad;             ///< N x d
  std::optional<Mat> grad_cemetery;
  std::optional<double> declared_bound;

  bool has_table() const noexcept { return lambda.has_value(); }
  /// S_0 at an initial state (zero for running costs).
  double start_value(std::size_t z) const { return lambda ? (*lambda)(static_cast<Eigen::Index>(z)) : 0.0; }
};

/// l(z) = sum_z' P_aug(z, z') Lambda(z') + kill(z) Lambda_cem(z) - Lambda(z).
Vec lagrangian(const AugmentedChain& aug, const Vec& lambda, const Vec& lambda_cemetery);

CostModel running_cost(const AugmentedChain& aug, Vec ell, std::optional<double> bound = {});

/// Builds a table cost. Missing cemetery tables default to the frozen-at-death
/// convention Lambda_cem(z) = Lambda(z).
CostModel table_cost(const AugmentedChain& aug, Vec lambda, std::optional<Vec> lambda_cemetery = {},
                     std::optional<Mat> grad = {}, std::optional<Mat> grad_cemetery = {},
                     std::optional<double> bound = {});

/// Lambda(t, x) = sum_k c_k t^k on a Time auxiliary, with its t-gradient.
CostModel time_polynomial_cost(const AugmentedChain& aug, std::span<const double> coefficients,
                               std::optional<double> bound = {});

struct SubmartingaleReport {
  bool pass = true;
  double worst_value = 0.0;              ///< min l over reachable states
  std::optional<std::size_t> worst_state;
  double initial_value = 0.0;            ///< max |Lambda| over initial states
  std::optional<std::size_t> initial_violation;
};

SubmartingaleReport check_submartingale(const AugmentedChain& aug, const CostModel& cost, double tol = 1e-12);

struct SemiSupermartingaleReport {
  double d_star = 0.0;
  std::optional<std::size_t> argmax;
  std::optional<double> declared;
  bool pass = true;
};

SemiSupermartingaleReport check_semi_supermartingale(const AugmentedChain& aug, const CostModel& cost);

enum class TwistStatus { Holds, Inconclusive };

struct TwistReport {
  TwistStatus status = TwistStatus::Inconclusive;
  std::size_t axis = 0;
  int sign = 0;                       ///< +1 strict sub-, -1 strict supermartingale gradient
  double margin = 0.0;                ///< min of sign * drift over checked states on `axis`
  std::optional<std::size_t> witness; ///< tightest state (holds) or a violating state
  Mat drift;                          ///< N x d gradient drift table
  std::size_t checked_states = 0;
};

/// Sufficient monotone-drift criterion for the twist condition. Checked over
/// reachable states that can survive one step.
TwistReport check_twist(const AugmentedChain& aug, const CostModel& cost, double margin = 1e-9);

}  // namespace skembed
