#pragma once

#include "skembed/chain.hpp"
#include "skembed/costs.hpp"
#include "skembed/lp.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace skembed::testing {

/// Gambler's ruin on {0..4}, p = 1/2 inside, rows 0 and 4 killed.
inline Mat g5_kernel() {
  Mat p = Mat::Zero(5, 5);
  for (int x = 1; x <= 3; ++x) {
    p(x, x - 1) = 0.5;
    p(x, x + 1) = 0.5;
  }
  return p;
}

inline Chain g5() { return validate_chain(g5_kernel(), Mode::Absorbing); }

inline Chain cycle3() {
  Mat p(3, 3);
  p << 0, 0.5, 0.5, 0.5, 0, 0.5, 0.5, 0.5, 0;
  return validate_chain(p, Mode::Ergodic);
}

inline Measure mass(std::initializer_list<double> m, double cemetery = 0.0) {
  Vec v(static_cast<Eigen::Index>(m.size()));
  Eigen::Index i = 0;
  for (double x : m) v(i++) = x;
  return Measure::from_mass(v, cemetery);
}

/// Time-augmented G5 with Lambda(t, x) = t^2.
struct RootInstance {
  Chain chain = g5();
  AugmentedChain aug = build_augmented(chain, TimeAux{12});
  CostModel cost;
  Measure mu = Measure::delta(5, 2);
  Measure nu = mass({0, 0.5, 0, 0.5, 0});
  RootInstance() {
    const double c[] = {0, 0, 1};
    cost = time_polynomial_cost(aug, c);
  }
};

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  bool coin(double p = 0.5) { return uniform() < p; }
  std::mt19937_64& engine() { return rng_; }

  /// Sparse absorbing kernel: each row keeps a random kill probability and
  /// spreads the rest over up to `degree` targets.
  Mat absorbing_kernel(std::size_t n, std::size_t degree = 3, double min_kill = 0.05, double max_kill = 0.4) {
    Mat p = Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t x = 0; x < n; ++x) {
      const double keep = 1.0 - uniform(min_kill, max_kill);
      const std::size_t k = index(1, std::min(degree, n));
      std::vector<double> w(k);
      double total = 0.0;
      for (auto& wi : w) total += (wi = uniform(0.1, 1.0));
      for (std::size_t j = 0; j < k; ++j) {
        const auto y = static_cast<Eigen::Index>(index(0, n - 1));
        p(static_cast<Eigen::Index>(x), y) += keep * w[j] / total;
      }
    }
    return p;
  }

  /// Strongly connected stochastic kernel: a random cycle plus random chords.
  Mat ergodic_kernel(std::size_t n, std::size_t extra = 2) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng_);
    Mat w = Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      w(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[(i + 1) % n])) = uniform(0.2, 1.0);
      for (std::size_t j = 0; j < extra; ++j)
        w(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(index(0, n - 1))) += uniform(0.0, 1.0);
    }
    for (Eigen::Index i = 0; i < w.rows(); ++i) w.row(i) /= w.row(i).sum();
    return w;
  }

  Measure probability(std::size_t n, double sparsity = 0.5) {
    Vec m = Vec::Zero(static_cast<Eigen::Index>(n));
    while (m.sum() <= 0.0) {
      for (std::size_t i = 0; i < n; ++i)
        if (coin(sparsity)) m(static_cast<Eigen::Index>(i)) = uniform(0.1, 1.0);
    }
    return Measure::from_mass(m / m.sum());
  }

  /// Random memoryless rule on augmented states.
  StoppingRule rule(std::size_t n, double stop_prob = 0.3, bool randomized = false) {
    StoppingRule r;
    r.p = Vec::Zero(static_cast<Eigen::Index>(n));
    r.deterministic = !randomized;
    for (std::size_t z = 0; z < n; ++z) {
      if (randomized && coin(0.3)) r.p(static_cast<Eigen::Index>(z)) = uniform();
      else r.p(static_cast<Eigen::Index>(z)) = coin(stop_prob) ? 1.0 : 0.0;
    }
    return r;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace skembed::testing
