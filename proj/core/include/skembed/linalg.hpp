#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <span>
#include <vector>

namespace skembed {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;

/// Pivot magnitude below which a dense factorization is declared singular.
inline constexpr double kSingularPivot = 1e-12;

/// Solves A x = b by LU with partial pivoting. Throws SingularSystem when a
/// pivot falls below kSingularPivot.
Vec solve_dense(const Mat& a, const Vec& b);

/// Sparse LU solve of A x = b. Throws SingularSystem when the factorization
/// fails or the residual exceeds 1e-9 (1 + |b|).
Vec solve_sparse(const SpMat& a, const Vec& b);

/// Factorization reused across several right-hand sides.
class DenseLu {
 public:
  explicit DenseLu(const Mat& a);
  Vec solve(const Vec& b) const;
  Vec solve_transposed(const Vec& b) const;
  Mat inverse() const;
  double min_pivot() const noexcept { return min_pivot_; }

 private:
  Eigen::PartialPivLU<Mat> lu_;
  double min_pivot_ = 0.0;
};

double sup_norm(const Vec& v);

/// Order-independent pairwise summation.
double pairwise_sum(std::span<const double> values);

}  // namespace skembed
