#pragma once

#include "fixtures.hpp"
#include "oracles.hpp"

namespace skembed::testing {

struct Instance {
  Chain chain;
  AugmentedChain aug;
  CostModel cost;
  Measure mu;
  Measure nu;
};

/// nu is the exact law of a random memoryless rule, so the pair is ordered.
inline Measure law_of_rule(const AugmentedChain& aug, const Measure& mu, const Vec& p_stop) {
  const auto fw = oracle::forward(aug, Vec::Zero(static_cast<Eigen::Index>(aug.size())), p_stop,
                                  oracle::lift_mu(aug, mu));
  Vec law = oracle::project(aug, fw.stopped);
  return Measure::from_mass(law, std::max(0.0, 1.0 - law.sum()));
}

/// Random absorbing instance with a running cost l in [0, 2]: up to 12 base
/// states and at most 120 augmented states.
inline Instance random_ordered(Gen& gen, std::size_t max_n = 12, std::size_t max_aug = 120) {
  const std::size_t n = gen.index(2, max_n);
  Chain chain = validate_chain(gen.absorbing_kernel(n), Mode::Absorbing);
  AuxSpec spec = TrivialAux{};
  const auto kind = gen.index(0, 2);
  Measure mu = gen.probability(n, 0.4);
  if (kind == 1) spec = TimeAux{gen.index(1, max_aug / n - 1)};
  if (kind == 2) spec = InitialStateAux{mu};
  AugmentedChain aug = build_augmented(chain, spec);
  Vec ell(static_cast<Eigen::Index>(aug.size()));
  for (auto& v : ell) v = gen.uniform(0, 2);
  CostModel cost = running_cost(aug, ell);
  const Measure nu = law_of_rule(aug, mu, gen.rule(aug.size(), gen.uniform(0.1, 0.6), gen.coin(0.3)).p);
  return {std::move(chain), std::move(aug), std::move(cost), std::move(mu), nu};
}

/// Case for the réduite shift: the identity holds wherever the augmented
/// dynamics agree with the base chain, so Time cases use a chain that dies
/// within n steps and mark only states that cannot reach the horizon alive.
struct NormalizationCase {
  Instance in;
  std::vector<bool> exact;
};

inline NormalizationCase random_normalization_case(Gen& gen, std::size_t max_n = 10) {
  const std::size_t n = gen.index(2, max_n);
  if (!gen.coin(0.5)) {
    Instance in = random_ordered(gen, max_n, 120);
    if (in.aug.kind() != AuxKind::Time) {
      std::vector<bool> all(in.aug.size(), true);
      return {std::move(in), std::move(all)};
    }
  }
  Mat p = Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t x = 0; x + 1 < n; ++x) {
    const double keep = 1.0 - gen.uniform(0.0, 0.3);
    double total = 0.0;
    Vec w = Vec::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t y = x + 1; y < n; ++y) total += (w(static_cast<Eigen::Index>(y)) = gen.uniform(0.1, 1.0));
    p.row(static_cast<Eigen::Index>(x)) = keep * w.transpose() / total;
  }
  Chain chain = validate_chain(p, Mode::Absorbing);
  const std::size_t t_max = n + gen.index(0, 4);
  AugmentedChain aug = build_augmented(chain, TimeAux{t_max});
  Vec ell(static_cast<Eigen::Index>(aug.size()));
  for (auto& v : ell) v = gen.uniform(0, 2);
  CostModel cost = running_cost(aug, ell);
  Measure mu = gen.probability(n, 0.4);
  std::vector<bool> exact(aug.size());
  for (std::size_t z = 0; z < aug.size(); ++z) {
    const auto t = static_cast<std::size_t>(aug.aux_coord(aug.aux_of(z))(0));
    exact[z] = t + (n - 1 - aug.base_of(z)) < t_max;
  }
  const Measure nu = law_of_rule(aug, mu, gen.rule(aug.size(), 0.3, false).p);
  return {{std::move(chain), std::move(aug), std::move(cost), std::move(mu), nu}, std::move(exact)};
}

}  // namespace skembed::testing
