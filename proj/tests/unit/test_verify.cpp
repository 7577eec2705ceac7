#include "instances.hpp"

#include "skembed/dual.hpp"
#include "skembed/lp.hpp"
#include "skembed/potential.hpp"
#include "skembed/snell.hpp"
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

struct Solved {
  EmbeddingLpResult lp;
  Vec psi;
  Vec v;
};

Solved solve(const AugmentedChain& aug, const CostModel& cost, const Measure& mu, const Measure& nu) {
  Solved s;
  s.lp = primal_embedding_lp(aug, cost, mu, nu);
  s.psi = complementary_dual(aug, cost, mu, nu, s.lp).psi;
  s.v = snell_envelope(aug, cost, s.psi).v;
  return s;
}

Vec rule_on(const AugmentedChain& aug, std::initializer_list<std::pair<std::size_t, std::size_t>> stops) {
  Vec p = Vec::Zero(static_cast<Eigen::Index>(aug.size()));
  for (auto [t, x] : stops) p(static_cast<Eigen::Index>(*aug.find(t, x))) = 1.0;
  return p;
}

}  // namespace

TEST(ContactSet, TimePotentialTouchesEverywhere) {
  const G5Running g;
  const Vec h = time_potential(g.chain);
  const auto cs = contact_set(g.aug, h, snell_envelope(g.aug, g.cost, h).v);
  for (bool b : cs.mask) EXPECT_TRUE(b);
}

TEST(ContactSet, ZeroPotentialTouchesEverywhere) {
  const G5Running g;
  const auto cs = contact_set(g.aug, Vec::Zero(5), snell_envelope(g.aug, g.cost, Vec::Zero(5)).v);
  for (bool b : cs.mask) EXPECT_TRUE(b);
  EXPECT_DOUBLE_EQ(cs.ctol, default_contact_tol(Vec::Zero(5)));
}

TEST(ContactSet, RootStoppedSupportInsideContact) {
  const RootInstance r;
  const Solved s = solve(r.aug, r.cost, r.mu, r.nu);
  const auto cs = contact_set(r.aug, s.psi, s.v);
  EXPECT_TRUE(cs.mask[*r.aug.find(1, 1)]);
  EXPECT_TRUE(cs.mask[*r.aug.find(1, 3)]);
  EXPECT_FALSE(cs.mask[*r.aug.find(0, 2)]);
}

TEST(Pushforward, ExitsOfGamblersRuin) {
  const G5Running g;
  StoppingRule rule{Vec::Zero(5), true};
  rule.p(0) = rule.p(4) = 1.0;
  const auto pf = pushforward(g.aug, g.cost, rule, g.mu);
  EXPECT_LT((pf.law - g.nu.mass).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(pf.expected_time, 4.0, 1e-12);
  EXPECT_NEAR(pf.expected_cost, 4.0, 1e-12);
  EXPECT_NEAR(pf.killed, 0.0, 1e-15);
}

TEST(Pushforward, StopAtOnce) {
  const G5Running g;
  const Measure m = mass({0.1, 0.2, 0.3, 0.4, 0});
  const auto pf = pushforward(g.aug, g.cost, StoppingRule{Vec::Ones(5), true}, m);
  EXPECT_LT((pf.law - m.mass).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(pf.expected_time, 0.0);
}

TEST(Pushforward, MatchesForwardPropagation) {
  Gen gen(64);
  for (int trial = 0; trial < 30; ++trial) {
    const Instance in = random_ordered(gen, 8, 80);
    const StoppingRule rule = gen.rule(in.aug.size(), 0.3, true);
    const auto pf = pushforward(in.aug, in.cost, rule, in.mu);
    const auto fw = oracle::forward(in.aug, in.cost.lagrangian, rule.p, oracle::lift_mu(in.aug, in.mu));
    EXPECT_LT((pf.law - oracle::project(in.aug, fw.stopped)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(pf.killed, fw.killed, 1e-12);
    EXPECT_NEAR(pf.expected_time, fw.expected_time, 1e-10 * (1 + fw.expected_time));
    EXPECT_NEAR(pf.expected_cost, fw.running_cost, 1e-10 * (1 + fw.running_cost));
    EXPECT_NEAR(pf.law.sum() + pf.killed, 1.0, 1e-12);
  }
}

TEST(Regularized, ThreeCycleHittingTime) {
  StoppingRule rule{Vec::Zero(3), true};
  rule.p(1) = 1.0;
  const auto rt = regularized_expected_time(cycle3(), rule, Measure::delta(3, 0), {1e-2, 1e-3, 1e-4}, 2.0);
  for (std::size_t i = 1; i < rt.expected_times.size(); ++i)
    EXPECT_LT(std::abs(rt.expected_times[i] - 2.0), std::abs(rt.expected_times[i - 1] - 2.0));
  EXPECT_LT(rt.error, 1e-6);
}

TEST(VerifyOptimality, GamblersRuinPasses) {
  const G5Running g;
  const Solved s = solve(g.aug, g.cost, g.mu, g.nu);
  const auto rep = verify_optimality(g.aug, g.cost, g.mu, s.psi, s.v, s.lp.occ);
  EXPECT_TRUE(rep.pass());
  EXPECT_LE(rep.sum_u_alpha, 1e-8);
  EXPECT_LE(std::abs(rep.gap), 1e-8);
}

TEST(VerifyOptimality, PerturbedPotentialOpensGap) {
  const G5Running g;
  const Solved s = solve(g.aug, g.cost, g.mu, g.nu);
  const Vec h = time_potential(g.chain);
  {
    Vec psi = h;
    psi(2) += 1e-2;  // stopping at the start now beats the walk
    const auto rep = verify_optimality(g.aug, g.cost, g.mu, psi, snell_envelope(g.aug, g.cost, psi).v, s.lp.occ);
    EXPECT_FALSE(rep.zero_gap);
    EXPECT_NEAR(rep.gap, 1e-2, 1e-12);
  }
  Gen gen(5);
  int opened = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Vec psi = h;
    for (auto& v : psi) v += gen.uniform(-1e-2, 1e-2);
    const auto rep = verify_optimality(g.aug, g.cost, g.mu, psi, snell_envelope(g.aug, g.cost, psi).v, s.lp.occ);
    EXPECT_GE(rep.gap, -1e-12);
    opened += rep.zero_gap ? 0 : 1;
  }
  EXPECT_GE(opened, 10);
}

TEST(VerifyOptimality, SuboptimalRuleFails) {
  const G5Running g;
  const Solved s = solve(g.aug, g.cost, g.mu, g.nu);
  const auto pf = pushforward(g.aug, g.cost, StoppingRule{Vec::Constant(5, 0.5), false}, g.mu);
  const auto rep = verify_optimality(g.aug, g.cost, g.mu, s.psi, s.v, pf.occ);
  EXPECT_FALSE(rep.support_in_contact && rep.martingale);
}

TEST(StopGo, OptimaHaveNoViolations) {
  const G5Running g;
  const Solved s = solve(g.aug, g.cost, g.mu, g.nu);
  EXPECT_TRUE(check_stop_go(g.aug, g.cost, s.v, s.lp.occ).pass());
  const RootInstance r;
  const Solved sr = solve(r.aug, r.cost, r.mu, r.nu);
  const auto rep = check_stop_go(r.aug, r.cost, sr.v, sr.lp.occ);
  EXPECT_TRUE(rep.pass());
}

TEST(StopGo, SwappedRuleDetected) {
  const RootInstance r;
  const Solved s = solve(r.aug, r.cost, r.mu, r.nu);
  // Stop early at (1,1) but keep going at (3,1).
  StoppingRule swapped{rule_on(r.aug, {{1, 1}, {3, 3}, {5, 3}, {5, 1}}), true};
  const auto pf = pushforward(r.aug, r.cost, swapped, r.mu);
  const auto rep = check_stop_go(r.aug, r.cost, s.v, pf.occ);
  ASSERT_FALSE(rep.pass());
  bool found = false;
  for (const auto& viol : rep.violations) {
    EXPECT_GT(viol.excess, 0.0);
    found |= viol.stop == *r.aug.find(1, 1) && viol.go == *r.aug.find(3, 1);
  }
  EXPECT_TRUE(found);
}

TEST(StopGo, EqualityCaseOnTimePotential) {
  // A long horizon keeps V = h on the early time slices.
  const Chain c = g5();
  const AugmentedChain a = build_augmented(c, TimeAux{80});
  const CostModel cost = running_cost(a, Vec::Ones(static_cast<Eigen::Index>(a.size())));
  const Vec h = time_potential(c);
  const Vec v = snell_envelope(a, cost, h).v;
  StoppingRule rule{Vec::Zero(static_cast<Eigen::Index>(a.size())), true};
  for (std::size_t z = 0; z < a.size(); ++z)
    if (a.base_of(z) == 0 || a.base_of(z) == 4 || a.aux_of(z) == 3) rule.p(static_cast<Eigen::Index>(z)) = 1.0;
  const auto pf = pushforward(a, cost, rule, Measure::delta(5, 2));
  const auto rep = check_stop_go(a, cost, v, pf.occ);
  EXPECT_GT(rep.pairs_checked, 0u);
  EXPECT_TRUE(rep.pass());
}

TEST(LocalTime, HaltingPoint) {
  const auto occ = ergodic_filling_lp(cycle3(), Measure::delta(3, 0), Measure::delta(3, 1));
  EXPECT_TRUE(local_time_check(occ, 1).optimal);
  const auto other = local_time_check(occ, 0);
  EXPECT_FALSE(other.optimal);
  EXPECT_GT(other.visits, 0.0);
  const auto same = ergodic_filling_lp(cycle3(), Measure::delta(3, 2), Measure::delta(3, 2));
  for (std::size_t x = 0; x < 3; ++x) EXPECT_TRUE(local_time_check(same, x).optimal);
}

TEST(SharpenDual, KeepsValue) {
  Gen gen(9);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance in = random_ordered(gen, 6, 40);
    const auto lp = primal_embedding_lp(in.aug, in.cost, in.mu, in.nu);
    const Vec psi = dual_from_lp(in.aug, in.cost, in.mu, in.nu, lp).psi;
    const Vec sharp = sharpen_dual(in.aug, in.cost, in.nu, psi);
    EXPECT_NEAR(dual_value(in.aug, in.cost, in.mu, in.nu, sharp), dual_value(in.aug, in.cost, in.mu, in.nu, psi),
                1e-9);
  }
}

TEST(Barrier, RootIsForwardBarrier) {
  const RootInstance r;
  const Solved s = solve(r.aug, r.cost, r.mu, r.nu);
  const auto tw = check_twist(r.aug, r.cost);
  const auto rep = barrier_report(r.aug, r.cost, r.mu, r.nu, s.psi, s.v, s.lp.occ, tw);
  EXPECT_TRUE(rep.pass()) << rep.caveat;
  EXPECT_EQ(rep.direction, +1);
  EXPECT_LE(rep.nu_error, 1e-10);
}

TEST(Barrier, EqualLawsStopAtTimeZero) {
  const RootInstance r;
  const Measure m = mass({0, 0.5, 0, 0.5, 0});
  const Solved s = solve(r.aug, r.cost, m, m);
  const auto rep = barrier_report(r.aug, r.cost, m, m, s.psi, s.v, s.lp.occ, check_twist(r.aug, r.cost));
  EXPECT_TRUE(rep.reproduces_nu);
  EXPECT_TRUE(rep.stopped[*r.aug.find(0, 1)]);
  EXPECT_TRUE(rep.stopped[*r.aug.find(0, 3)]);
}
