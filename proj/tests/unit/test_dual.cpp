#include "instances.hpp"

#include "skembed/dual.hpp"
#include "skembed/lp.hpp"
#include "skembed/potential.hpp"
#include "skembed/verify.hpp"

#include <gtest/gtest.h>

using namespace skembed;
using namespace skembed::testing;

namespace {

struct G5Running {
  Chain chain = g5();
  AugmentedChain aug = build_augmented(chain, TrivialAux{});
  CostModel cost = running_cost(aug, Vec::Ones(5));
  Measure mu = Measure::delta(5, 2);
  Measure nu = mass({0.5, 0, 0, 0, 0.5});
};

}  // namespace

TEST(DualValue, ZeroPotential) {
  const G5Running g;
  EXPECT_NEAR(dual_value(g.aug, g.cost, g.mu, g.nu, Vec::Zero(5)), 0.0, 1e-15);
}

TEST(DualValue, TimePotential) {
  const G5Running g;
  const Vec h = time_potential(g.chain);
  EXPECT_NEAR(dual_value(g.aug, g.cost, g.mu, g.nu, h), 4.0, 1e-12);
  EXPECT_NEAR(oracle::dual_value(g.aug, g.cost, g.mu, g.nu, h), 4.0, 1e-12);
}

TEST(DualValue, MatchesOracleOnRandomPotentials) {
  Gen gen(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance in = random_ordered(gen, 8, 60);
    Vec psi(static_cast<Eigen::Index>(in.chain.size()));
    for (auto& v : psi) v = gen.uniform(-4, 0);
    EXPECT_NEAR(dual_value(in.aug, in.cost, in.mu, in.nu, psi), oracle::dual_value(in.aug, in.cost, in.mu, in.nu, psi),
                1e-9);
  }
}

TEST(Supergradient, ZeroPotentialStopsAtOnce) {
  const G5Running g;
  const auto sg = supergradient(g.aug, g.cost, g.mu, g.nu, Vec::Zero(5));
  EXPECT_LT((sg.g - (g.nu.mass - g.mu.mass)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(sg.g_cemetery, 0.0, 1e-15);
}

TEST(Supergradient, VanishesAtOptimum) {
  const G5Running g;
  const auto lp = primal_embedding_lp(g.aug, g.cost, g.mu, g.nu);
  const Vec psi = dual_from_lp(g.aug, g.cost, g.mu, g.nu, lp).psi;
  const auto sg = supergradient(g.aug, g.cost, g.mu, g.nu, sharpen_dual(g.aug, g.cost, g.nu, psi));
  EXPECT_LT(sg.g.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Supergradient, IsASupergradient) {
  // U(psi') <= U(psi) + g . (psi' - psi) for random pairs.
  Gen gen(77);
  for (int trial = 0; trial < 15; ++trial) {
    const Instance in = random_ordered(gen, 6, 40);
    const auto n = static_cast<Eigen::Index>(in.chain.size());
    Vec a(n), b(n);
    for (auto& v : a) v = gen.uniform(-3, 0);
    for (auto& v : b) v = gen.uniform(-3, 0);
    const auto sg = supergradient(in.aug, in.cost, in.mu, in.nu, a);
    const double ub = sg.value + sg.g.dot(b - a);
    EXPECT_LE(dual_value(in.aug, in.cost, in.mu, in.nu, b), ub + 1e-9);
  }
}

TEST(ChooseK, TableCosts) {
  const RootInstance r;
  EXPECT_DOUBLE_EQ(choose_K(r.aug, r.cost), 144.0);
  const double lin[] = {0, 1};
  EXPECT_DOUBLE_EQ(choose_K(r.aug, time_polynomial_cost(r.aug, lin)), 12.0);
}

TEST(ChooseK, MartingaleCost) {
  const G5Running g;
  EXPECT_DOUBLE_EQ(choose_K(g.aug, running_cost(g.aug, Vec::Zero(5))), 0.0);
}

TEST(IterativeDual, EqualLawsConvergeImmediately) {
  const G5Running g;
  const Measure m = mass({0, 0.5, 0.5, 0, 0});
  DualOptions opts;
  opts.target = 0.0;
  const auto res = solve_dual_iterative(g.aug, g.cost, m, m, opts);
  EXPECT_TRUE(res.converged);
  EXPECT_NEAR(res.value, 0.0, 1e-12);
  EXPECT_LE(res.iterations, 1u);
}

TEST(IterativeDual, GamblersRuin) {
  const G5Running g;
  DualOptions opts;
  opts.target = 4.0;
  const auto res = solve_dual_iterative(g.aug, g.cost, g.mu, g.nu, opts);
  EXPECT_TRUE(res.converged);
  EXPECT_NEAR(res.value, 4.0, 1e-6);
  EXPECT_LE(res.psi.maxCoeff(), 0.0);
  EXPECT_GE(res.psi.minCoeff(), -res.k_box);
  EXPECT_LE(res.worst_polish_loss, 1e-10);
}

TEST(IterativeDual, RandomInstancesCloseTheGapWithPolyakSteps) {
  Gen gen(2718);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance in = random_ordered(gen, 6, 40);
    const auto lp = primal_embedding_lp(in.aug, in.cost, in.mu, in.nu);
    DualOptions opts;
    opts.target = lp.occ.objective;
    opts.step = StepRule::Polyak;
    const auto res = solve_dual_iterative(in.aug, in.cost, in.mu, in.nu, opts);
    EXPECT_LE(std::abs(lp.occ.objective - res.value), 1e-6) << "trial " << trial;
    EXPECT_LE(res.psi.maxCoeff(), 0.0);
    EXPECT_GE(res.psi.minCoeff(), -res.k_box);
  }
}

// Diminishing steps keep every iterate in the box and below the primal value;
// they need not reach 1e-6 within the iteration cap.
TEST(IterativeDual, DiminishingStepsRespectWeakDuality) {
  Gen gen(2718);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance in = random_ordered(gen, 6, 40);
    const auto lp = primal_embedding_lp(in.aug, in.cost, in.mu, in.nu);
    DualOptions opts;
    opts.target = lp.occ.objective;
    opts.max_iterations = 2000;
    const auto res = solve_dual_iterative(in.aug, in.cost, in.mu, in.nu, opts);
    for (double u : res.history) EXPECT_LE(u, lp.occ.objective + 1e-8);
    EXPECT_LE(res.worst_polish_loss, 1e-10);
    EXPECT_LE(res.psi.maxCoeff(), 0.0);
    EXPECT_GE(res.psi.minCoeff(), -res.k_box);
  }
}
