// Randomized checks of the structural identities each module promises.

#include "instances.hpp"

#include "skembed/dual.hpp"
#include "skembed/lp.hpp"
#include "skembed/potential.hpp"
#include "skembed/snell.hpp"
#include "skembed/verify.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace skembed;
using namespace skembed::testing;

namespace {

Vec random_vec(Gen& gen, std::size_t n, double lo, double hi) {
  Vec v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = gen.uniform(lo, hi);
  return v;
}

}  // namespace

TEST(ChainInvariants, PowerIterationDecays) {
  Gen gen(1);
  for (int trial = 0; trial < 30; ++trial) {
    const Mat p = gen.absorbing_kernel(gen.index(1, 12));
    validate_chain(p, Mode::Absorbing);
    Vec v = Vec::Ones(p.rows());
    double prev = 1.0;
    for (int k = 0; k < 1000; ++k) {
      v = p * v;
      EXPECT_LE(v.maxCoeff(), prev + 1e-15);
      prev = v.maxCoeff();
    }
    EXPECT_LT(prev, 1e-9);
  }
}

TEST(ChainInvariants, InvariantLawAnnihilatesGenerator) {
  Gen gen(2);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = gen.index(2, 9);
    const Chain c = validate_chain(gen.ergodic_kernel(n), Mode::Ergodic);
    const Vec g = invariant_distribution(c).mass;
    EXPECT_LT((c.kernel().transpose() * g - g).cwiseAbs().maxCoeff(), 1e-12);
    for (int k = 0; k < 20; ++k) {
      const Vec f = random_vec(gen, n, -5, 5);
      EXPECT_NEAR(g.dot(generator_apply(c, f)), 0.0, 1e-10);
    }
  }
}

TEST(ChainInvariants, GeneratorIsLinear) {
  Gen gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = gen.index(1, 10);
    const Chain c = validate_chain(gen.absorbing_kernel(n), Mode::Absorbing);
    const Vec f = random_vec(gen, n, -3, 3), h = random_vec(gen, n, -3, 3);
    const double a = gen.uniform(-2, 2), b = gen.uniform(-2, 2);
    const Vec lhs = generator_apply(c, a * f + b * h);
    const Vec rhs = a * generator_apply(c, f) + b * generator_apply(c, h);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(CostInvariants, TelescopingIdentity) {
  Gen gen(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = gen.index(2, 8);
    const Chain c = validate_chain(gen.absorbing_kernel(n), Mode::Absorbing);
    const AugmentedChain a = build_augmented(c, TimeAux{gen.index(2, 8)});
    const auto nz = static_cast<Eigen::Index>(a.size());
    Vec lambda = random_vec(gen, a.size(), -2, 2);
    for (std::size_t x = 0; x < n; ++x) lambda(static_cast<Eigen::Index>(*a.initial_state(x))) = 0.0;
    const CostModel cost = table_cost(a, lambda, random_vec(gen, a.size(), -2, 2));
    (void)nz;
    const auto pf = pushforward(a, cost, gen.rule(a.size(), 0.3, true), gen.probability(n));
    ASSERT_TRUE(pf.terminal_cost.has_value());
    EXPECT_NEAR(*pf.terminal_cost, pf.expected_cost, 1e-10 * (1 + std::abs(pf.expected_cost)));
  }
}

TEST(CostInvariants, SubmartingaleCostsHaveNonnegativeMean) {
  Gen gen(5);
  for (int trial = 0; trial < 30; ++trial) {
    const Instance in = random_ordered(gen, 8, 60);
    ASSERT_TRUE(check_submartingale(in.aug, in.cost).pass);
    for (int k = 0; k < 5; ++k) {
      const auto pf = pushforward(in.aug, in.cost, gen.rule(in.aug.size(), 0.4, true), in.mu);
      EXPECT_GE(pf.expected_cost, -1e-12);
    }
  }
}

TEST(CostInvariants, RandomBuildsAreMarginallyConsistent) {
  Gen gen(6);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = gen.index(1, 10);
    const Chain c = validate_chain(gen.absorbing_kernel(n), Mode::Absorbing);
    AuxSpec spec = TrivialAux{};
    switch (trial % 3) {
      case 1: spec = TimeAux{gen.index(1, 10)}; break;
      case 2: spec = InitialStateAux{gen.probability(n)}; break;
      default: break;
    }
    const AugmentedChain a = build_augmented(c, spec);
    double worst = 0.0;
    for (std::size_t z = 0; z < a.size(); ++z) {
      if (a.truncated(z)) continue;
      Vec row = Vec::Zero(static_cast<Eigen::Index>(n));
      for (const auto& t : a.row(z)) row(static_cast<Eigen::Index>(a.base_of(t.to))) += t.prob;
      worst = std::max(worst, (row - c.kernel().row(static_cast<Eigen::Index>(a.base_of(z))).transpose()).cwiseAbs().maxCoeff());
    }
    EXPECT_LT(worst, 1e-14);
    EXPECT_LT(marginal_residual(a), 1e-14);
  }
}

TEST(PotentialInvariants, ReduiteIdempotentAndMinimal) {
  Gen gen(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = gen.index(1, 10);
    const Chain c = validate_chain(gen.absorbing_kernel(n), Mode::Absorbing);
    const Vec psi = random_vec(gen, n, -1, 2);
    const Vec r = reduite(c, psi);
    EXPECT_LT((reduite(c, r) - r).cwiseAbs().maxCoeff(), 1e-12);
    // A supermedian majorant: the réduite of a pointwise larger function.
    const Vec phi = reduite(c, psi.cwiseMax(random_vec(gen, n, -1, 2)));
    EXPECT_GE((phi - r).minCoeff(), -1e-12);
  }
}

TEST(PotentialInvariants, OrderedPairsRespectSupermedianTests) {
  Gen gen(8);
  for (int trial = 0; trial < 60; ++trial) {
    const Instance in = random_ordered(gen, 8, 120);
    if (in.aug.kind() != AuxKind::Trivial) continue;
    ASSERT_TRUE(check_balayage(in.chain, in.mu, in.nu).ordered);
    for (int k = 0; k < 100; ++k) {
      const Vec phi = reduite(in.chain, random_vec(gen, in.chain.size(), -1, 1));
      EXPECT_LE(phi.dot(in.nu.mass), phi.dot(in.mu.mass) + 1e-10);
    }
  }
}

TEST(PotentialInvariants, ErgodicPotentialCentredAndSolved) {
  Gen gen(9);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = gen.index(2, 8);
    const Chain c = validate_chain(gen.ergodic_kernel(n), Mode::Ergodic);
    const Measure sigma = gen.probability(n);
    const Vec g = invariant_distribution(c).mass;
    const Vec u = ergodic_potential(c, sigma);
    EXPECT_NEAR(u.dot(g), 0.0, 1e-10);
    const Vec rhs = Vec::Ones(static_cast<Eigen::Index>(n)) - sigma.mass.cwiseQuotient(g);
    EXPECT_LT((generator_apply(c, u) - rhs).cwiseAbs().maxCoeff(), 1e-10);
  }
}

// Every feasible occupation has the same total time when l = 1; walk over
// vertices with random objectives on an instance that admits many embeddings.
TEST(PotentialInvariants, ExpectedTimeIsConstantAcrossVertices) {
  const Chain c = g5();
  const AugmentedChain a = build_augmented(c, TimeAux{12});
  const Measure mu = Measure::delta(5, 2);
  const Measure nu = mass({0.375, 0, 0.25, 0, 0.375});
  const double expect = expected_embedding_time(c, mu, nu);
  const Vec mu_aug = lift_initial(a, mu);
  Gen gen(10);
  std::set<std::vector<long long>> vertices;
  for (int k = 0; k < 200 && vertices.size() < 20; ++k) {
    const auto nz = static_cast<std::size_t>(a.size());
    const auto lp = solve_embedding_lp(a, mu_aug, nu.mass, random_vec(gen, nz, -1, 1), random_vec(gen, nz, -1, 1));
    ASSERT_EQ(lp.status, LpStatus::Optimal);
    EXPECT_NEAR(lp.occ.u.sum(), expect, 1e-9);
    std::vector<long long> key;
    for (Eigen::Index i = 0; i < lp.occ.s.size(); ++i) key.push_back(std::llround(lp.occ.s(i) * 1e9));
    vertices.insert(key);
  }
  EXPECT_GE(vertices.size(), 5u);
}

TEST(SnellInvariants, ResidualComplementarityMonotonicity) {
  Gen gen(11);
  for (int trial = 0; trial < 30; ++trial) {
    const Instance in = random_ordered(gen, 8, 60);
    const auto n = in.chain.size();
    const Vec psi = random_vec(gen, n, -4, 0);
    const Vec v = snell_envelope(in.aug, in.cost, psi).v;
    EXPECT_LE(snell_residual(in.aug, in.cost, psi, v), 1e-10);
    const Vec alpha = doob_meyer(in.aug, in.cost, v);
    const Vec gap = v - lift_potential(in.aug, psi);
    EXPECT_LE(alpha.cwiseProduct(gap).cwiseAbs().maxCoeff(), 1e-9 * (1 + sup_norm(v)));
    const Vec phi = psi + random_vec(gen, n, 0, 1);
    const Vec w = snell_envelope(in.aug, in.cost, phi).v;
    EXPECT_GE((w - v).minCoeff(), -1e-12);
  }
}

TEST(SnellInvariants, NormalizationIdentity) {
  Gen gen(12);
  for (int trial = 0; trial < 50; ++trial) {
    const auto nc = random_normalization_case(gen);
    const Instance& in = nc.in;
    const Vec psi = random_vec(gen, in.chain.size(), -3, 3);
    const auto np = normalize_psi(in.aug, in.cost, psi);
    const Vec v = snell_envelope(in.aug, in.cost, psi).v;
    const Vec vbar = snell_envelope(in.aug, in.cost, np.psi_bar).v;
    const Vec diff = vbar - (v - lift_potential(in.aug, np.reduite));
    for (std::size_t z = 0; z < in.aug.size(); ++z)
      if (nc.exact[z]) EXPECT_LE(std::abs(diff(static_cast<Eigen::Index>(z))), 1e-10);
  }
}

TEST(LpInvariants, OccupationIdentitiesAndSlackness) {
  Gen gen(13);
  for (int trial = 0; trial < 30; ++trial) {
    const Instance in = random_ordered(gen, 8, 60);
    const auto lp = primal_embedding_lp(in.aug, in.cost, in.mu, in.nu);
    EXPECT_LT((project_base(in.aug, lp.occ.s) - in.nu.mass).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(lp.occ.s.sum() + lp.occ.killed_mass, 1.0, 1e-10);
    const Vec balance = lp.occ.u + lp.occ.s - in.aug.kernel().transpose() * lp.occ.u - lift_initial(in.aug, in.mu);
    EXPECT_LT(balance.cwiseAbs().maxCoeff(), 1e-10);

    const auto cd = complementary_dual(in.aug, in.cost, in.mu, in.nu, lp);
    const Vec v = snell_envelope(in.aug, in.cost, cd.psi).v;
    const Vec alpha = doob_meyer(in.aug, in.cost, v);
    const Vec slack = v - lift_potential(in.aug, cd.psi);
    const double tol = 1e-7 * (1 + sup_norm(v));
    for (Eigen::Index z = 0; z < slack.size(); ++z) {
      if (lp.occ.s(z) > 1e-9) EXPECT_LE(slack(z), tol);
      if (lp.occ.u(z) > 1e-9) EXPECT_LE(alpha(z), tol);
    }
  }
}

TEST(VerifyInvariants, PushforwardOfExtractedRuleIsIdentity) {
  Gen gen(14);
  for (int trial = 0; trial < 30; ++trial) {
    const Instance in = random_ordered(gen, 8, 60);
    const auto lp = primal_embedding_lp(in.aug, in.cost, in.mu, in.nu);
    const auto pf = pushforward(in.aug, in.cost, extract_stopping_rule(lp.occ), in.mu);
    EXPECT_LT((pf.occ.u - lp.occ.u).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((pf.occ.s - lp.occ.s).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(VerifyInvariants, CertifiedOptimaPassEveryAudit) {
  Gen gen(15);
  for (int trial = 0; trial < 30; ++trial) {
    const Instance in = random_ordered(gen, 8, 60);
    const auto lp = primal_embedding_lp(in.aug, in.cost, in.mu, in.nu);
    const auto dual = dual_from_lp(in.aug, in.cost, in.mu, in.nu, lp, 1e-8);
    const Vec& v = dual.v_snell;
    const auto rep = verify_optimality(in.aug, in.cost, in.mu, dual.psi, v, lp.occ);
    EXPECT_TRUE(rep.pass()) << "trial " << trial << " gap " << rep.gap << " sum u alpha " << rep.sum_u_alpha;
    EXPECT_TRUE(check_stop_go(in.aug, in.cost, v, lp.occ).pass());
  }
}

TEST(DualInvariants, ConcavityOfDualValue) {
  Gen gen(16);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance in = random_ordered(gen, 6, 40);
    const Vec a = random_vec(gen, in.chain.size(), -3, 0), b = random_vec(gen, in.chain.size(), -3, 0);
    const double mid = dual_value(in.aug, in.cost, in.mu, in.nu, 0.5 * (a + b));
    const double avg = 0.5 * (dual_value(in.aug, in.cost, in.mu, in.nu, a) + dual_value(in.aug, in.cost, in.mu, in.nu, b));
    EXPECT_GE(mid, avg - 1e-10);
  }
}
