#include "skembed/simplex.hpp"

#include "skembed/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace skembed {

std::string_view to_string(LpStatus status) noexcept {
  switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "unknown";
}

namespace {

constexpr double kClean = 1e-13;

enum class PhaseOutcome { Optimal, Unbounded };

// Standard-form tableau data: columns are structurals, then slack/surplus,
// then one artificial per row.
class Revised {
 public:
  Revised(const LinearProgram& lp, const SimplexOptions& opts) : opts_(opts) {
    m_ = lp.a.rows();
    n_ = lp.a.cols();
    Eigen::Index slacks = 0;
    for (RowType t : lp.rows)
      if (t != RowType::Equal) ++slacks;
    n_slack_ = slacks;
    art0_ = n_ + n_slack_;
    cols_ = art0_ + m_;
    a_ = Mat::Zero(m_, cols_);
    a_.leftCols(n_) = lp.a;
    b_ = lp.b;
    flip_ = Vec::Ones(m_);
    slack_of_row_.assign(static_cast<std::size_t>(m_), -1);
    Eigen::Index k = n_;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const RowType t = lp.rows[static_cast<std::size_t>(i)];
      if (t != RowType::Equal) {
        a_(i, k) = (t == RowType::LessEqual) ? 1.0 : -1.0;
        slack_of_row_[static_cast<std::size_t>(i)] = k;
        ++k;
      }
      if (b_(i) < 0.0) {
        flip_(i) = -1.0;
        a_.row(i) *= -1.0;
        b_(i) *= -1.0;
      }
      a_(i, art0_ + i) = 1.0;
    }
    basis_.resize(static_cast<std::size_t>(m_));
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index s = slack_of_row_[static_cast<std::size_t>(i)];
      basis_[static_cast<std::size_t>(i)] = (s >= 0 && a_(i, s) > 0.0) ? s : art0_ + i;
    }
    is_basic_.assign(static_cast<std::size_t>(cols_), false);
    for (Eigen::Index j : basis_) is_basic_[static_cast<std::size_t>(j)] = true;
    refactor();
  }

  bool is_artificial(Eigen::Index j) const { return j >= art0_; }

  bool needs_phase_one() const {
    return std::any_of(basis_.begin(), basis_.end(), [&](Eigen::Index j) { return is_artificial(j); });
  }

  void refactor() {
    Mat bm(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i) bm.col(i) = a_.col(basis_[static_cast<std::size_t>(i)]);
    try {
      DenseLu lu(bm);
      binv_ = lu.inverse();
    } catch (const Error&) {
      throw Error(ErrorCode::NumericalBreakdown, "basis matrix became singular");
    }
    xb_ = binv_ * b_;
    for (Eigen::Index i = 0; i < m_; ++i)
      if (std::abs(xb_(i)) < kClean) xb_(i) = 0.0;
    since_refactor_ = 0;
  }

  Vec duals(const Vec& cost) const {
    Vec cb(m_);
    for (Eigen::Index i = 0; i < m_; ++i) cb(i) = cost(basis_[static_cast<std::size_t>(i)]);
    return binv_.transpose() * cb;
  }

  PhaseOutcome run(const Vec& cost, bool allow_artificial_entry) {
    std::size_t degenerate_run = 0;
    for (;;) {
      if (iterations_ >= opts_.max_iterations) {
        throw Error(ErrorCode::NonConvergence, "simplex iteration cap reached");
      }
      if (since_refactor_ >= opts_.refactor_every) refactor();
      const Vec y = duals(cost);
      const Vec d = cost.transpose() - y.transpose() * a_;

      Eigen::Index enter = -1;
      double best = -opts_.opt_tol;
      const Eigen::Index limit = allow_artificial_entry ? cols_ : art0_;
      for (Eigen::Index j = 0; j < limit; ++j) {
        if (is_basic_[static_cast<std::size_t>(j)]) continue;
        if (bland_) {
          if (d(j) < -opts_.opt_tol) {
            enter = j;
            break;
          }
        } else if (d(j) < best) {
          best = d(j);
          enter = j;
        }
      }
      if (enter < 0) return PhaseOutcome::Optimal;

      const Vec col = binv_ * a_.col(enter);
      Eigen::Index leave = -1;
      double theta = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (col(i) <= opts_.pivot_tol) continue;
        const double r = std::max(xb_(i), 0.0) / col(i);
        const bool tie = leave >= 0 && std::abs(r - theta) <= 1e-12 * (1.0 + theta);
        if (leave < 0 || (r < theta && !tie)) {
          leave = i;
          theta = r;
        } else if (tie) {
          const bool better = bland_ ? basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)]
                                     : col(i) > col(leave);
          if (better) {
            leave = i;
            theta = std::min(theta, r);
          }
        }
      }
      if (leave < 0) {
        entering_ = enter;
        direction_ = col;
        return PhaseOutcome::Unbounded;
      }

      if (theta <= opts_.feas_tol) {
        if (++degenerate_run >= opts_.degenerate_limit && opts_.pricing == Pricing::Dantzig && !bland_) {
          bland_ = true;
        }
      } else {
        degenerate_run = 0;
      }
      pivot(enter, leave, col, theta);
    }
  }

  void pivot(Eigen::Index enter, Eigen::Index leave, const Vec& col, double theta) {
    xb_ -= theta * col;
    xb_(leave) = theta;
    for (Eigen::Index i = 0; i < m_; ++i)
      if (std::abs(xb_(i)) < kClean) xb_(i) = 0.0;
    const double piv = col(leave);
    binv_.row(leave) /= piv;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (i == leave || col(i) == 0.0) continue;
      binv_.row(i) -= col(i) * binv_.row(leave);
    }
    is_basic_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(leave)])] = false;
    is_basic_[static_cast<std::size_t>(enter)] = true;
    basis_[static_cast<std::size_t>(leave)] = enter;
    ++iterations_;
    ++since_refactor_;
  }

  // Pivots zero-valued artificials out of the basis where a structural or
  // slack column can replace them; rows where none can are redundant.
  void expel_artificials() {
    for (Eigen::Index r = 0; r < m_; ++r) {
      if (!is_artificial(basis_[static_cast<std::size_t>(r)])) continue;
      const Vec row = binv_.row(r) * a_.leftCols(art0_);
      Eigen::Index best = -1;
      double mag = 1e-9;
      for (Eigen::Index j = 0; j < art0_; ++j) {
        if (is_basic_[static_cast<std::size_t>(j)]) continue;
        if (std::abs(row(j)) > mag) {
          mag = std::abs(row(j));
          best = j;
        }
      }
      if (best < 0) continue;
      const Vec col = binv_ * a_.col(best);
      pivot(best, r, col, xb_(r) / col(r));
    }
    refactor();
  }

  Vec primal() const {
    Vec x = Vec::Zero(cols_);
    for (Eigen::Index i = 0; i < m_; ++i) x(basis_[static_cast<std::size_t>(i)]) = std::max(xb_(i), 0.0);
    return x;
  }

  double artificial_mass() const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < m_; ++i)
      if (is_artificial(basis_[static_cast<std::size_t>(i)])) s += std::max(xb_(i), 0.0);
    return s;
  }

  Eigen::Index m_ = 0, n_ = 0, n_slack_ = 0, art0_ = 0, cols_ = 0;
  Mat a_;
  Vec b_;
  Vec flip_;
  std::vector<Eigen::Index> slack_of_row_;
  std::vector<Eigen::Index> basis_;
  std::vector<bool> is_basic_;
  Mat binv_;
  Vec xb_;
  std::size_t since_refactor_ = 0;
  std::size_t iterations_ = 0;
  bool bland_ = false;
  Eigen::Index entering_ = -1;
  Vec direction_;
  SimplexOptions opts_;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, const SimplexOptions& opts) {
  const Eigen::Index m = lp.a.rows();
  const Eigen::Index n = lp.a.cols();
  if (lp.b.size() != m || static_cast<Eigen::Index>(lp.rows.size()) != m || lp.c.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "linear program dimensions are inconsistent");
  }
  Revised rs(lp, opts);
  rs.bland_ = opts.pricing == Pricing::Bland;
  LpResult out;

  if (rs.needs_phase_one()) {
    Vec cost1 = Vec::Zero(rs.cols_);
    cost1.tail(m).setOnes();
    rs.run(cost1, false);
    const double infeas = rs.artificial_mass();
    if (infeas > opts.feas_tol * (1.0 + sup_norm(rs.b_))) {
      out.status = LpStatus::Infeasible;
      const Vec y = rs.duals(cost1);
      out.farkas = y.cwiseProduct(rs.flip_);
      out.iterations = rs.iterations_;
      out.used_bland = rs.bland_;
      out.objective = infeas;
      return out;
    }
    rs.expel_artificials();
  }

  Vec cost2 = Vec::Zero(rs.cols_);
  const double sign = lp.sense == Sense::Maximize ? -1.0 : 1.0;
  cost2.head(n) = sign * lp.c;
  const PhaseOutcome res = rs.run(cost2, false);
  out.iterations = rs.iterations_;
  out.used_bland = rs.bland_;
  out.basis.assign(rs.basis_.begin(), rs.basis_.end());

  if (res == PhaseOutcome::Unbounded) {
    out.status = LpStatus::Unbounded;
    Vec dir = Vec::Zero(rs.cols_);
    dir(rs.entering_) = 1.0;
    for (Eigen::Index i = 0; i < m; ++i) dir(rs.basis_[static_cast<std::size_t>(i)]) -= rs.direction_(i);
    out.ray = dir.head(n);
    return out;
  }

  out.status = LpStatus::Optimal;
  Vec x = rs.primal().head(n);
  for (Eigen::Index j = 0; j < n; ++j)
    if (x(j) < kClean) x(j) = 0.0;
  out.x = x;
  out.objective = lp.c.dot(x);
  const Vec y = rs.duals(cost2);
  out.duals = sign * y.cwiseProduct(rs.flip_);
  out.reduced_costs = sign * (cost2.head(n).transpose() - y.transpose() * rs.a_.leftCols(n)).transpose();
  return out;
}

FarkasCheck check_farkas(const LinearProgram& lp, const Vec& y) {
  FarkasCheck chk;
  const Vec ya = lp.a.transpose() * y;
  chk.max_violation = ya.size() ? std::max(0.0, ya.maxCoeff()) : 0.0;
  for (std::size_t i = 0; i < lp.rows.size(); ++i) {
    const double yi = y(static_cast<Eigen::Index>(i));
    if (lp.rows[i] == RowType::LessEqual) chk.max_violation = std::max(chk.max_violation, yi);
    if (lp.rows[i] == RowType::GreaterEqual) chk.max_violation = std::max(chk.max_violation, -yi);
  }
  chk.yb = y.dot(lp.b);
  return chk;
}

}  // namespace skembed
