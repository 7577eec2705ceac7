#include "instances.hpp"

#include "skembed/lp.hpp"
#include "skembed/sim.hpp"
#include "skembed/snell.hpp"
#include "skembed/verify.hpp"

#include <benchmark/benchmark.h>

using namespace skembed;
using namespace skembed::testing;

namespace {

// Random walk on n states killed at both ends, Time aux with the given horizon.
struct Walk {
  Chain chain;
  AugmentedChain aug;
  CostModel cost;
  Measure mu;
  Measure nu;

  Walk(std::size_t n, std::size_t horizon)
      : chain(make_chain(n)),
        aug(build_augmented(chain, TimeAux{horizon})),
        cost(running_cost(aug, Vec::Ones(static_cast<Eigen::Index>(aug.size())))),
        mu(Measure::delta(n, n / 2)),
        nu(law_of_rule(aug, mu, hit_ends(aug, n))) {}

  static Chain make_chain(std::size_t n) {
    Mat p = Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t x = 1; x + 1 < n; ++x) {
      p(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x - 1)) = 0.5;
      p(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x + 1)) = 0.5;
    }
    return validate_chain(p, Mode::Absorbing);
  }

  static Vec hit_ends(const AugmentedChain& aug, std::size_t n) {
    Vec p = Vec::Zero(static_cast<Eigen::Index>(aug.size()));
    for (std::size_t z = 0; z < aug.size(); ++z)
      if (aug.base_of(z) == 0 || aug.base_of(z) == n - 1 || aug.truncated(z)) p(static_cast<Eigen::Index>(z)) = 1.0;
    return p;
  }
};

void BM_EmbeddingLp(benchmark::State& state) {
  const Walk w(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(primal_embedding_lp(w.aug, w.cost, w.mu, w.nu).occ.objective);
  state.counters["aug_states"] = static_cast<double>(w.aug.size());
}
BENCHMARK(BM_EmbeddingLp)->Args({7, 10})->Args({9, 14})->Args({11, 10})->Unit(benchmark::kMillisecond);

void BM_SnellEnvelope(benchmark::State& state) {
  const Walk w(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  Vec psi = Vec::Zero(static_cast<Eigen::Index>(w.chain.size()));
  psi(0) = psi(psi.size() - 1) = -1.0;
  for (auto _ : state) benchmark::DoNotOptimize(snell_envelope(w.aug, w.cost, psi).v.sum());
  state.counters["aug_states"] = static_cast<double>(w.aug.size());
}
BENCHMARK(BM_SnellEnvelope)->Args({9, 20})->Args({21, 60})->Args({41, 200});

void BM_Pushforward(benchmark::State& state) {
  const Walk w(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const StoppingRule rule{Walk::hit_ends(w.aug, w.chain.size()), true};
  for (auto _ : state) benchmark::DoNotOptimize(pushforward(w.aug, w.cost, rule, w.mu).expected_cost);
}
BENCHMARK(BM_Pushforward)->Args({9, 20})->Args({21, 60})->Args({41, 200});

void BM_SamplePaths(benchmark::State& state) {
  const Walk w(9, 40);
  SimConfig cfg;
  cfg.n_paths = static_cast<std::size_t>(state.range(0));
  cfg.rule = StoppingRule{Walk::hit_ends(w.aug, w.chain.size()), true};
  cfg.threads = static_cast<unsigned>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(sample_paths(w.aug, w.cost, w.mu, cfg).mean_cost);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SamplePaths)->Args({10000, 1})->Args({10000, 4})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
