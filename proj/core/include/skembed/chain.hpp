#pragma once

#include "skembed/linalg.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace skembed {

enum class Mode { Absorbing, Ergodic };

std::string_view to_string(Mode mode) noexcept;

/// Finite-state sub-stochastic chain. The cemetery is implicit: the kill
/// probability at x is the row deficit 1 - sum_y P(x, y).
///
/// Instances are only produced by validate_chain() (or regularize()), so every
/// Chain satisfies the invariants of its declared mode.
class Chain {
 public:
  std::size_t size() const noexcept { return static_cast<std::size_t>(kernel_.rows()); }
  const Mat& kernel() const noexcept { return kernel_; }
  Mode mode() const noexcept { return mode_; }
  double kill(std::size_t x) const { return kill_(static_cast<Eigen::Index>(x)); }
  const Vec& kill_vector() const noexcept { return kill_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::string label(std::size_t x) const;

 private:
  friend Chain validate_chain(Mat kernel, Mode declared, std::vector<std::string> labels);
  friend Chain regularize(const Chain& chain, double beta);

  Chain(Mat kernel, Mode mode, std::vector<std::string> labels);

  Mat kernel_;
  Vec kill_;
  Mode mode_;
  std::vector<std::string> labels_;
};

/// Probability mass on the states plus the mass sitting in the cemetery.
struct Measure {
  Vec mass;
  double cemetery = 0.0;

  double total() const { return mass.sum() + cemetery; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(mass.size()); }

  static Measure delta(std::size_t n, std::size_t x);
  static Measure from_mass(Vec mass, double cemetery = 0.0);
};

/// Checks a probability measure against a chain: nonnegative, total mass 1,
/// and no cemetery mass in ergodic mode.
void check_measure(const Chain& chain, const Measure& m, std::string_view name);

/// Verifies the raw kernel against the declared mode. Absorbing requires a
/// finite expected lifetime (certified twice: by power iteration and by a
/// nonnegative solution of (I - P) e = 1). Ergodic requires stochastic rows
/// and a strongly connected positive-entry graph.
Chain validate_chain(Mat kernel, Mode declared, std::vector<std::string> labels = {});

/// Expected number of steps to the cemetery, e = (I - P)^{-1} 1.
Vec expected_lifetime(const Chain& chain);

/// Invariant law of an ergodic chain.
Measure invariant_distribution(const Chain& chain);

/// (Delta f)(x) = sum_y P(x, y) f(y) + kill(x) f_cemetery - f(x).
Vec generator_apply(const Chain& chain, const Vec& f, double f_cemetery = 0.0);

/// Geometric killing at rate beta: kernel (1 - beta) P, absorbing mode.
Chain regularize(const Chain& chain, double beta);

/// Strongly connected components of the graph {P(x, y) > threshold}.
/// Returns the component index of each state.
std::vector<std::size_t> strong_components(const Mat& kernel, double threshold = 1e-15);

}  // namespace skembed
