#include "skembed/sim.hpp"

#include "skembed/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <cstdlib>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace skembed {

namespace {

std::uint64_t splitmix(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct PathResult {
  std::int64_t end = -1;  // base state, -1 killed, -2 truncated
  double time = 0.0;
  double cost = 0.0;
  double martingale = 0.0;
};

double mean_of(const std::vector<double>& xs) { return pairwise_sum(xs) / static_cast<double>(xs.size()); }

double se_of(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - mean) * (xs[i] - mean);
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
}

}  // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint64_t stream) noexcept {
  std::uint64_t h = splitmix(seed);
  h = splitmix(h ^ path);
  h = splitmix(h ^ step);
  h = splitmix(h ^ stream);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

unsigned default_threads() {
  if (const char* env = std::getenv("SKEMBED_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SimStats sample_paths(const AugmentedChain& aug, const CostModel& cost, const Measure& mu, const SimConfig& config,
                      const Vec* v) {
  if (config.n_paths < 1) throw Error(ErrorCode::InputError, "need at least one path");
  const auto nz = static_cast<Eigen::Index>(aug.size());
  if (config.rule.p.size() != nz) throw Error(ErrorCode::DimensionMismatch, "rule length mismatch");
  if (v && v->size() != nz) throw Error(ErrorCode::DimensionMismatch, "value table length mismatch");
  check_measure(aug.base(), mu, "mu");
  lift_initial(aug, mu);

  SimStats st;
  st.n_paths = config.n_paths;
  if (config.max_steps) {
    st.max_steps = *config.max_steps;
  } else if (aug.base().mode() == Mode::Absorbing) {
    st.max_steps = static_cast<std::size_t>(std::ceil(50.0 * expected_lifetime(aug.base()).maxCoeff()));
  } else {
    st.max_steps = 50 * (aug.horizon() + 1);
  }
  {
    Vec tail = Vec::Ones(nz);
    for (std::size_t t = 0; t < st.max_steps && tail.maxCoeff() > 0.0; ++t) tail = aug.kernel() * tail;
    st.truncation_bound = tail.maxCoeff();
  }

  // Start-state sampling table.
  std::vector<double> start_cdf;
  std::vector<std::size_t> start_state;
  double acc = 0.0;
  for (std::size_t x = 0; x < aug.base().size(); ++x) {
    const double m = mu.mass(static_cast<Eigen::Index>(x));
    if (m <= 0.0) continue;
    acc += m;
    start_cdf.push_back(acc);
    start_state.push_back(*aug.initial_state(x));
  }
  const Vec pv = v ? Vec(aug.kernel() * *v) : Vec();

  std::vector<PathResult> results(config.n_paths);
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t path = begin; path < end; ++path) {
      PathResult r;
      const double u0 = counter_uniform(config.seed, path, 0, 0) * acc;
      std::size_t k = 0;
      while (k + 1 < start_cdf.size() && u0 >= start_cdf[k]) ++k;
      std::size_t z = start_state[k];
      r.cost = cost.start_value(z);
      std::size_t t = 0;
      for (;; ++t) {
        if (counter_uniform(config.seed, path, t, 1) < config.rule.p(static_cast<Eigen::Index>(z))) {
          r.end = static_cast<std::int64_t>(aug.base_of(z));
          break;
        }
        if (t >= st.max_steps) {
          r.end = -2;
          break;
        }
        const double u = counter_uniform(config.seed, path, t, 2);
        double c = 0.0;
        std::optional<std::size_t> next;
        for (const auto& tr : aug.row(z)) {
          c += tr.prob;
          if (u < c) {
            next = tr.to;
            break;
          }
        }
        r.cost += cost.lagrangian(static_cast<Eigen::Index>(z));
        if (v) r.martingale += (next ? (*v)(static_cast<Eigen::Index>(*next)) : 0.0) - pv(static_cast<Eigen::Index>(z));
        if (!next) {
          r.end = -1;
          ++t;
          break;
        }
        z = *next;
      }
      r.time = static_cast<double>(t);
      results[path] = r;
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(config.threads ? config.threads : default_threads(),
                                                           static_cast<unsigned>(std::min<std::size_t>(config.n_paths, 1u << 16))));
  if (threads == 1) {
    run(0, config.n_paths);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (config.n_paths + threads - 1) / threads;
    for (unsigned i = 0; i < threads; ++i) {
      const std::size_t b = i * chunk, e = std::min(config.n_paths, b + chunk);
      if (b < e) pool.emplace_back(run, b, e);
    }
    for (auto& th : pool) th.join();
  }

  st.counts = Vec::Zero(static_cast<Eigen::Index>(aug.base().size()));
  std::vector<double> times(config.n_paths), costs(config.n_paths), mart(config.n_paths);
  for (std::size_t i = 0; i < config.n_paths; ++i) {
    const auto& r = results[i];
    if (r.end >= 0) st.counts(r.end) += 1.0;
    if (r.end == -1) ++st.killed_count;
    if (r.end == -2) ++st.truncated;
    times[i] = r.time;
    costs[i] = r.cost;
    mart[i] = r.martingale;
  }
  st.mean_time = mean_of(times);
  st.se_time = se_of(times, st.mean_time);
  st.mean_cost = mean_of(costs);
  st.se_cost = se_of(costs, st.mean_cost);
  if (v) {
    st.mean_martingale = mean_of(mart);
    st.se_martingale = se_of(mart, *st.mean_martingale);
  }
  if (static_cast<double>(st.truncated) > 1e-3 * static_cast<double>(config.n_paths)) {
    throw Error(ErrorCode::ExcessTruncation, std::to_string(st.truncated) + " of " + std::to_string(config.n_paths) +
                                                 " paths reached " + std::to_string(st.max_steps) + " steps");
  }
  return st;
}

EmpiricalComparison compare_empirical(const SimStats& stats, const Measure& exact, std::optional<double> exact_time,
                                      std::optional<double> exact_cost) {
  EmpiricalComparison cmp;
  const auto n = static_cast<double>(stats.n_paths);
  const auto k = exact.mass.size();
  Vec emp(k + 1), ref(k + 1);
  emp << stats.law(), stats.killed_frequency();
  ref << exact.mass, exact.cemetery;
  cmp.tv = 0.5 * (emp - ref).lpNorm<1>();
  cmp.tv_threshold = std::max(0.01, 4.0 * std::sqrt(static_cast<double>(k) / n));
  cmp.low_power = cmp.tv_threshold > 0.1;
  cmp.z = Vec::Zero(k + 1);
  for (Eigen::Index i = 0; i <= k; ++i) {
    const double p = ref(i);
    const double var = p * (1.0 - p) / n;
    if (var > 0.0) {
      cmp.z(i) = (emp(i) - p) / std::sqrt(var);
    } else if (emp(i) != p) {
      cmp.z(i) = std::copysign(std::numeric_limits<double>::infinity(), emp(i) - p);
    }
  }
  cmp.max_abs_z = cmp.z.cwiseAbs().maxCoeff();
  auto moment_z = [](double mean, double se, double ref_value) {
    if (se > 0.0) return (mean - ref_value) / se;
    return mean == ref_value ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), mean - ref_value);
  };
  bool moments_ok = true;
  if (exact_time) {
    cmp.z_time = moment_z(stats.mean_time, stats.se_time, *exact_time);
    moments_ok = moments_ok && std::abs(*cmp.z_time) <= 4.0;
  }
  if (exact_cost) {
    cmp.z_cost = moment_z(stats.mean_cost, stats.se_cost, *exact_cost);
    moments_ok = moments_ok && std::abs(*cmp.z_cost) <= 4.0;
  }
  cmp.pass = cmp.max_abs_z <= 4.0 && cmp.tv <= cmp.tv_threshold && moments_ok;
  return cmp;
}

void write_frequency_csv(std::ostream& os, const Chain& chain, const SimStats& stats, const Measure& exact) {
  const Vec emp = stats.law();
  os << "state,empirical,exact\n";
  for (std::size_t x = 0; x < chain.size(); ++x) {
    os << chain.label(x) << ',' << emp(static_cast<Eigen::Index>(x)) << ',' << exact.mass(static_cast<Eigen::Index>(x)) << '\n';
  }
  os << "cemetery," << stats.killed_frequency() << ',' << exact.cemetery << '\n';
}

}  // namespace skembed
