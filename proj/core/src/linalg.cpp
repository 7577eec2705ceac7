#include "skembed/linalg.hpp"

#include "skembed/error.hpp"

#include <cmath>
#include <string>

namespace skembed {

DenseLu::DenseLu(const Mat& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "LU of a non-square matrix");
  }
  if (a.rows() == 0) {
    return;
  }
  lu_.compute(a);
  min_pivot_ = lu_.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(min_pivot_ >= kSingularPivot)) {
    throw Error(ErrorCode::SingularSystem,
                "pivot " + std::to_string(min_pivot_) + " below threshold");
  }
}

Vec DenseLu::solve(const Vec& b) const {
  if (b.size() == 0) return b;
  return lu_.solve(b);
}

Vec DenseLu::solve_transposed(const Vec& b) const {
  if (b.size() == 0) return b;
  return lu_.transpose().solve(b);
}

Mat DenseLu::inverse() const { return lu_.inverse(); }

Vec solve_dense(const Mat& a, const Vec& b) {
  if (a.rows() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "right-hand side length mismatch");
  }
  return DenseLu(a).solve(b);
}

Vec solve_sparse(const SpMat& a, const Vec& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "sparse system has inconsistent sizes");
  }
  if (b.size() == 0) return b;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "sparse LU failed: " + lu.lastErrorMessage());
  Vec x = lu.solve(b);
  const double residual = x.allFinite() ? sup_norm(a * x - b) : INFINITY;
  if (!(residual <= 1e-9 * (1.0 + sup_norm(b)))) {
    throw Error(ErrorCode::SingularSystem, "sparse solve residual " + std::to_string(residual));
  }
  return x;
}

double sup_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace skembed
