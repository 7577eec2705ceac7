#include "skembed/costs.hpp"

#include "skembed/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace skembed {

namespace {

constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();
constexpr double kMarginalTol = 1e-12;
constexpr std::size_t kMaxAutoHorizon = 100000;

Vec single_coord(double v) {
  Vec c(1);
  c(0) = v;
  return c;
}

}  // namespace

std::string_view to_string(AuxKind kind) noexcept {
  switch (kind) {
    case AuxKind::Trivial: return "trivial";
    case AuxKind::Time: return "time";
    case AuxKind::InitialState: return "initial-state";
    case AuxKind::Explicit: return "explicit";
  }
  return "unknown";
}

AugmentedChain::AugmentedChain(const Chain& base, AuxKind kind) : base_(base), kind_(kind) {}

std::optional<std::size_t> AugmentedChain::find(std::size_t aux, std::size_t base) const {
  const std::size_t n = base_.size();
  if (aux >= coords_.size() || base >= n) return std::nullopt;
  const std::size_t z = index_[aux * n + base];
  if (z == kNoIndex) return std::nullopt;
  return z;
}

std::string AugmentedChain::label(std::size_t z) const {
  const auto& s = states_.at(z);
  std::ostringstream os;
  os << '(';
  if (kind_ == AuxKind::Trivial) {
    os << base_.label(s.base) << ')';
    return os.str();
  }
  if (kind_ == AuxKind::InitialState) {
    os << base_.label(s.aux);
  } else {
    const Vec& c = coords_[s.aux];
    if (c.size() == 0) os << s.aux;
    for (Eigen::Index k = 0; k < c.size(); ++k) os << (k ? "," : "") << c(k);
  }
  os << ';' << base_.label(s.base) << ')';
  return os.str();
}

void AugmentedChain::finalize() {
  const std::size_t n = base_.size();
  const std::size_t count = states_.size();
  index_.assign(coords_.size() * n, kNoIndex);
  for (std::size_t z = 0; z < count; ++z) {
    const auto& s = states_[z];
    if (s.aux >= coords_.size() || s.base >= n) {
      throw Error(ErrorCode::DimensionMismatch, "augmented state refers to an unknown aux or base index");
    }
    if (index_[s.aux * n + s.base] != kNoIndex) {
      throw Error(ErrorCode::InputError, "duplicate augmented state");
    }
    index_[s.aux * n + s.base] = z;
  }
  kill_ = Vec::Ones(static_cast<Eigen::Index>(count)) - kernel_.rowwise().sum();
  transitions_.clear();
  row_start_.assign(count + 1, 0);
  for (std::size_t z = 0; z < count; ++z) {
    if (std::abs(kill_(static_cast<Eigen::Index>(z))) <= 1e-12) kill_(static_cast<Eigen::Index>(z)) = 0.0;
    row_start_[z] = transitions_.size();
    for (std::size_t w = 0; w < count; ++w) {
      const double p = kernel_(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(w));
      if (p > 0.0) transitions_.push_back({w, p});
    }
  }
  row_start_[count] = transitions_.size();
  if (truncated_.size() != count) truncated_.assign(count, false);
}

AugmentedChain build_augmented(const Chain& base, const AuxSpec& spec) {
  const std::size_t n = base.size();
  const Mat& p = base.kernel();
  const auto ni = static_cast<Eigen::Index>(n);

  if (std::holds_alternative<TrivialAux>(spec)) {
    AugmentedChain aug(base, AuxKind::Trivial);
    aug.coords_.push_back(Vec(0));
    for (std::size_t x = 0; x < n; ++x) aug.states_.push_back({0, x});
    aug.kernel_ = p;
    aug.initial_.resize(n);
    for (std::size_t x = 0; x < n; ++x) aug.initial_[x] = x;
    aug.finalize();
    return aug;
  }

  if (const auto* time = std::get_if<TimeAux>(&spec)) {
    // Survival mass after t steps, per start state: P^t 1.
    std::size_t t_max = 0;
    Vec survive = Vec::Ones(ni);
    if (time->t_max) {
      t_max = *time->t_max;
      for (std::size_t t = 0; t < t_max; ++t) survive = p * survive;
    } else {
      while (survive.maxCoeff() > time->tail_tol) {
        survive = p * survive;
        if (++t_max > kMaxAutoHorizon) {
          throw Error(ErrorCode::HorizonTooSmall,
                      "survival tail does not decay; supply T_max or regularize the chain");
        }
      }
    }
    AugmentedChain aug(base, AuxKind::Time);
    for (std::size_t t = 0; t <= t_max; ++t) aug.coords_.push_back(single_coord(static_cast<double>(t)));
    for (std::size_t t = 0; t <= t_max; ++t)
      for (std::size_t x = 0; x < n; ++x) aug.states_.push_back({t, x});
    const auto count = static_cast<Eigen::Index>(aug.states_.size());
    aug.kernel_ = Mat::Zero(count, count);
    aug.truncated_.assign(aug.states_.size(), false);
    for (std::size_t t = 0; t <= t_max; ++t) {
      for (std::size_t x = 0; x < n; ++x) {
        const auto z = static_cast<Eigen::Index>(t * n + x);
        if (t == t_max) {
          aug.truncated_[static_cast<std::size_t>(z)] = true;
          continue;
        }
        aug.kernel_.block(z, static_cast<Eigen::Index>((t + 1) * n), 1, ni) = p.row(static_cast<Eigen::Index>(x));
      }
    }
    aug.initial_.resize(n);
    for (std::size_t x = 0; x < n; ++x) aug.initial_[x] = x;  // (0, x)
    aug.horizon_ = t_max;
    aug.truncation_mass_ = survive.maxCoeff();
    aug.horizon_too_small_ = aug.truncation_mass_ > time->tail_tol;
    aug.finalize();
    return aug;
  }

  if (const auto* init = std::get_if<InitialStateAux>(&spec)) {
    if (init->mu.size() != n) {
      throw Error(ErrorCode::DimensionMismatch, "initial law length does not match the chain");
    }
    AugmentedChain aug(base, AuxKind::InitialState);
    // aux index is the base index of x0; only supp(mu) is instantiated.
    for (std::size_t a = 0; a < n; ++a) aug.coords_.push_back(single_coord(static_cast<double>(a)));
    std::vector<std::size_t> support;
    for (std::size_t x = 0; x < n; ++x)
      if (init->mu.mass(static_cast<Eigen::Index>(x)) > 0.0) support.push_back(x);
    if (support.empty()) throw Error(ErrorCode::InputError, "initial law has empty support");
    for (std::size_t a : support)
      for (std::size_t x = 0; x < n; ++x) aug.states_.push_back({a, x});
    const auto count = static_cast<Eigen::Index>(aug.states_.size());
    aug.kernel_ = Mat::Zero(count, count);
    aug.initial_.assign(n, std::nullopt);
    for (std::size_t k = 0; k < support.size(); ++k) {
      const auto off = static_cast<Eigen::Index>(k * n);
      aug.kernel_.block(off, off, ni, ni) = p;
      aug.initial_[support[k]] = k * n + support[k];
    }
    aug.finalize();
    return aug;
  }

  const auto& ex = std::get<ExplicitAux>(spec);
  AugmentedChain aug(base, AuxKind::Explicit);
  if (ex.coords.empty()) throw Error(ErrorCode::InputError, "explicit auxiliary needs at least one aux value");
  const auto d = ex.coords.front().size();
  for (const auto& c : ex.coords) {
    if (c.size() != d) throw Error(ErrorCode::DimensionMismatch, "aux coordinates have inconsistent dimension");
  }
  const auto count = static_cast<Eigen::Index>(ex.states.size());
  if (ex.kernel.rows() != count || ex.kernel.cols() != count) {
    throw Error(ErrorCode::DimensionMismatch, "augmented kernel must be square over the state list");
  }
  if ((ex.kernel.array() < 0.0).any()) throw Error(ErrorCode::NegativeEntry, "augmented kernel has a negative entry");
  if (ex.initial.size() != n) throw Error(ErrorCode::DimensionMismatch, "initial map must have one entry per base state");
  aug.coords_ = ex.coords;
  aug.states_ = ex.states;
  aug.kernel_ = ex.kernel;
  aug.initial_ = ex.initial;
  for (std::size_t x = 0; x < n; ++x) {
    if (ex.initial[x] && (*ex.initial[x] >= ex.states.size() || ex.states[*ex.initial[x]].base != x)) {
      throw Error(ErrorCode::InputError, "initial map of base state " + std::to_string(x) + " is inconsistent");
    }
  }
  aug.finalize();
  const double res = marginal_residual(aug);
  if (res > kMarginalTol) {
    throw Error(ErrorCode::MarginalMismatch, "augmented kernel marginal differs from base by " + std::to_string(res));
  }
  return aug;
}

double marginal_residual(const AugmentedChain& aug) {
  const std::size_t n = aug.base().size();
  const Mat& p = aug.base().kernel();
  double worst = 0.0;
  Vec sums(static_cast<Eigen::Index>(n));
  for (std::size_t z = 0; z < aug.size(); ++z) {
    if (aug.truncated(z)) continue;
    sums.setZero();
    for (const auto& tr : aug.row(z)) sums(static_cast<Eigen::Index>(aug.base_of(tr.to))) += tr.prob;
    const auto x = static_cast<Eigen::Index>(aug.base_of(z));
    worst = std::max(worst, (sums.transpose() - p.row(x)).cwiseAbs().maxCoeff());
  }
  return worst;
}

Vec lift_initial(const AugmentedChain& aug, const Measure& mu) {
  const std::size_t n = aug.base().size();
  if (mu.size() != n) throw Error(ErrorCode::DimensionMismatch, "initial law length does not match the chain");
  if (mu.cemetery > 0.0) throw Error(ErrorCode::InputError, "initial law may not charge the cemetery");
  Vec out = Vec::Zero(static_cast<Eigen::Index>(aug.size()));
  for (std::size_t x = 0; x < n; ++x) {
    const double m = mu.mass(static_cast<Eigen::Index>(x));
    if (m <= 0.0) continue;
    const auto z = aug.initial_state(x);
    if (!z) {
      throw Error(ErrorCode::InputError, "base state " + std::to_string(x) + " has no initial augmented state");
    }
    out(static_cast<Eigen::Index>(*z)) += m;
  }
  return out;
}

Vec project_base(const AugmentedChain& aug, const Vec& per_state) {
  Vec out = Vec::Zero(static_cast<Eigen::Index>(aug.base().size()));
  for (std::size_t z = 0; z < aug.size(); ++z) out(static_cast<Eigen::Index>(aug.base_of(z))) += per_state(static_cast<Eigen::Index>(z));
  return out;
}

std::vector<bool> reachable_from(const AugmentedChain& aug, const Vec& start) {
  std::vector<bool> seen(aug.size(), false);
  std::deque<std::size_t> queue;
  for (std::size_t z = 0; z < aug.size(); ++z) {
    if (start(static_cast<Eigen::Index>(z)) > 0.0) {
      seen[z] = true;
      queue.push_back(z);
    }
  }
  while (!queue.empty()) {
    const std::size_t z = queue.front();
    queue.pop_front();
    for (const auto& tr : aug.row(z)) {
      if (!seen[tr.to]) {
        seen[tr.to] = true;
        queue.push_back(tr.to);
      }
    }
  }
  return seen;
}

std::vector<bool> reachable_from_initial(const AugmentedChain& aug) {
  Vec start = Vec::Zero(static_cast<Eigen::Index>(aug.size()));
  for (std::size_t x = 0; x < aug.base().size(); ++x)
    if (auto z = aug.initial_state(x)) start(static_cast<Eigen::Index>(*z)) = 1.0;
  return reachable_from(aug, start);
}

Vec lagrangian(const AugmentedChain& aug, const Vec& lambda, const Vec& lambda_cemetery) {
  const auto count = static_cast<Eigen::Index>(aug.size());
  if (lambda.size() != count) throw Error(ErrorCode::DimensionMismatch, "cost table length mismatch");
  if (lambda_cemetery.size() != count) {
    throw Error(ErrorCode::MissingCemeteryValue, "cemetery cost table must have one value per augmented state");
  }
  if (!lambda.allFinite() || !lambda_cemetery.allFinite()) {
    throw Error(ErrorCode::MissingCemeteryValue, "cost tables must be finite");
  }
  return aug.kernel() * lambda + aug.kill_vector().cwiseProduct(lambda_cemetery) - lambda;
}

CostModel running_cost(const AugmentedChain& aug, Vec ell, std::optional<double> bound) {
  if (ell.size() != static_cast<Eigen::Index>(aug.size())) {
    throw Error(ErrorCode::DimensionMismatch, "running cost length mismatch");
  }
  if (!ell.allFinite()) throw Error(ErrorCode::InputError, "running cost must be finite");
  CostModel c;
  c.lagrangian = std::move(ell);
  c.declared_bound = bound;
  return c;
}

CostModel table_cost(const AugmentedChain& aug, Vec lambda, std::optional<Vec> lambda_cemetery,
                     std::optional<Mat> grad, std::optional<Mat> grad_cemetery, std::optional<double> bound) {
  CostModel c;
  Vec cem = lambda_cemetery ? *lambda_cemetery : lambda;
  c.lagrangian = lagrangian(aug, lambda, cem);
  c.lambda = std::move(lambda);
  c.lambda_cemetery = std::move(cem);
  const auto count = static_cast<Eigen::Index>(aug.size());
  if (grad) {
    if (grad->rows() != count || grad->cols() < 1) {
      throw Error(ErrorCode::DimensionMismatch, "gradient table must be N x d with d >= 1");
    }
    Mat gcem = grad_cemetery ? *grad_cemetery : *grad;
    if (gcem.rows() != count || gcem.cols() != grad->cols()) {
      throw Error(ErrorCode::MissingCemeteryValue, "cemetery gradient table has the wrong shape");
    }
    c.grad = std::move(grad);
    c.grad_cemetery = std::move(gcem);
  }
  c.declared_bound = bound;
  return c;
}

CostModel time_polynomial_cost(const AugmentedChain& aug, std::span<const double> coefficients,
                               std::optional<double> bound) {
  if (aug.kind() != AuxKind::Time) throw Error(ErrorCode::InputError, "polynomial time cost needs a Time auxiliary");
  const auto count = static_cast<Eigen::Index>(aug.size());
  Vec lambda(count);
  Mat grad(count, 1);
  for (Eigen::Index z = 0; z < count; ++z) {
    const double t = aug.aux_coord(aug.aux_of(static_cast<std::size_t>(z)))(0);
    double v = 0.0, dv = 0.0;
    for (std::size_t k = coefficients.size(); k-- > 0;) {
      dv = dv * t + v;
      v = v * t + coefficients[k];
    }
    lambda(z) = v;
    grad(z, 0) = dv;
  }
  return table_cost(aug, std::move(lambda), std::nullopt, std::move(grad), std::nullopt, bound);
}

SubmartingaleReport check_submartingale(const AugmentedChain& aug, const CostModel& cost, double tol) {
  SubmartingaleReport rep;
  const auto reach = reachable_from_initial(aug);
  rep.worst_value = std::numeric_limits<double>::infinity();
  for (std::size_t z = 0; z < aug.size(); ++z) {
    if (!reach[z]) continue;
    const double l = cost.lagrangian(static_cast<Eigen::Index>(z));
    if (l < rep.worst_value) {
      rep.worst_value = l;
      rep.worst_state = z;
    }
  }
  if (!rep.worst_state) rep.worst_value = 0.0;
  rep.pass = rep.worst_value >= -tol;
  if (cost.lambda) {
    for (std::size_t x = 0; x < aug.base().size(); ++x) {
      const auto z = aug.initial_state(x);
      if (!z) continue;
      const double v = std::abs((*cost.lambda)(static_cast<Eigen::Index>(*z)));
      if (v > rep.initial_value) {
        rep.initial_value = v;
        rep.initial_violation = *z;
      }
    }
    if (rep.initial_value > tol) {
      rep.pass = false;
    } else {
      rep.initial_violation.reset();
    }
  }
  return rep;
}

SemiSupermartingaleReport check_semi_supermartingale(const AugmentedChain& aug, const CostModel& cost) {
  SemiSupermartingaleReport rep;
  const auto reach = reachable_from_initial(aug);
  rep.d_star = -std::numeric_limits<double>::infinity();
  for (std::size_t z = 0; z < aug.size(); ++z) {
    if (!reach[z]) continue;
    const double l = cost.lagrangian(static_cast<Eigen::Index>(z));
    if (l > rep.d_star) {
      rep.d_star = l;
      rep.argmax = z;
    }
  }
  if (!rep.argmax) rep.d_star = 0.0;
  rep.declared = cost.declared_bound;
  rep.pass = !rep.declared || rep.d_star <= *rep.declared + 1e-12;
  return rep;
}

TwistReport check_twist(const AugmentedChain& aug, const CostModel& cost, double margin) {
  if (!cost.grad || cost.grad->cols() < 1) throw Error(ErrorCode::NoGradient, "twist check needs a gradient table");
  const Mat& g = *cost.grad;
  const Mat& gcem = *cost.grad_cemetery;
  TwistReport rep;
  rep.drift = aug.kernel() * g + aug.kill_vector().asDiagonal() * gcem - g;

  const auto reach = reachable_from_initial(aug);
  std::vector<std::size_t> checked;
  for (std::size_t z = 0; z < aug.size(); ++z) {
    // A row that dies surely has no nontrivial continuation to compare against.
    if (reach[z] && aug.kill(z) < 1.0 - 1e-15) checked.push_back(z);
  }
  rep.checked_states = checked.size();

  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < g.cols(); ++k) {
    for (int sign : {+1, -1}) {
      double lo = std::numeric_limits<double>::infinity();
      std::optional<std::size_t> at;
      for (std::size_t z : checked) {
        const double v = sign * rep.drift(static_cast<Eigen::Index>(z), k);
        if (v < lo) {
          lo = v;
          at = z;
        }
      }
      if (checked.empty()) lo = 0.0;
      if (lo > best) {
        best = lo;
        rep.axis = static_cast<std::size_t>(k);
        rep.sign = sign;
        rep.margin = lo;
        rep.witness = at;
      }
    }
  }
  rep.status = (rep.margin >= margin) ? TwistStatus::Holds : TwistStatus::Inconclusive;
  return rep;
}

}  // namespace skembed
