#include "skembed/chain.hpp"

#include "skembed/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace skembed {

namespace {

constexpr double kRowSumSlack = 1e-12;
constexpr double kEdgeThreshold = 1e-15;

Vec row_deficit(const Mat& kernel) {
  Vec kill = Vec::Ones(kernel.rows()) - kernel.rowwise().sum();
  for (Eigen::Index i = 0; i < kill.size(); ++i) {
    if (std::abs(kill(i)) <= kRowSumSlack) kill(i) = 0.0;
  }
  return kill;
}

bool is_irreducible(const Mat& kernel) {
  const auto comp = strong_components(kernel, kEdgeThreshold);
  return std::all_of(comp.begin(), comp.end(), [&](std::size_t c) { return c == comp.front(); });
}

}  // namespace

std::string_view to_string(Mode mode) noexcept {
  return mode == Mode::Absorbing ? "absorbing" : "ergodic";
}

Chain::Chain(Mat kernel, Mode mode, std::vector<std::string> labels)
    : kernel_(std::move(kernel)), kill_(row_deficit(kernel_)), mode_(mode), labels_(std::move(labels)) {}

std::string Chain::label(std::size_t x) const {
  return x < labels_.size() ? labels_[x] : std::to_string(x);
}

Measure Measure::delta(std::size_t n, std::size_t x) {
  Measure m{Vec::Zero(static_cast<Eigen::Index>(n)), 0.0};
  m.mass(static_cast<Eigen::Index>(x)) = 1.0;
  return m;
}

Measure Measure::from_mass(Vec mass, double cemetery) { return Measure{std::move(mass), cemetery}; }

void check_measure(const Chain& chain, const Measure& m, std::string_view name) {
  const std::string who(name);
  if (m.size() != chain.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                who + " has " + std::to_string(m.size()) + " entries, chain has " +
                    std::to_string(chain.size()));
  }
  if ((m.mass.array() < 0.0).any() || m.cemetery < 0.0) {
    throw Error(ErrorCode::NegativeEntry, who + " has negative mass");
  }
  if (std::abs(m.total() - 1.0) > 1e-9) {
    throw Error(ErrorCode::InputError, who + " total mass is " + std::to_string(m.total()));
  }
  if (chain.mode() == Mode::Ergodic && m.cemetery > 0.0) {
    throw Error(ErrorCode::InputError, who + " has cemetery mass on an ergodic chain");
  }
}

std::vector<std::size_t> strong_components(const Mat& kernel, double threshold) {
  // Iterative Tarjan.
  const std::size_t n = static_cast<std::size_t>(kernel.rows());
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t next_index = 0, next_comp = 0;

  struct Frame {
    std::size_t v;
    std::size_t next_child;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnset) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      bool descended = false;
      while (f.next_child < n) {
        const std::size_t w = f.next_child++;
        if (!(kernel(static_cast<Eigen::Index>(f.v), static_cast<Eigen::Index>(w)) > threshold)) continue;
        if (index[w] == kUnset) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
          descended = true;
          break;
        }
        if (on_stack[w]) low[f.v] = std::min(low[f.v], index[w]);
      }
      if (descended) continue;
      const std::size_t v = f.v;
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = next_comp;
        } while (w != v);
        ++next_comp;
      }
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
    }
  }
  return comp;
}

Chain validate_chain(Mat kernel, Mode declared, std::vector<std::string> labels) {
  if (kernel.rows() != kernel.cols() || kernel.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "kernel must be a non-empty square table");
  }
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(kernel.rows())) {
    throw Error(ErrorCode::DimensionMismatch, "label count does not match state count");
  }
  const Eigen::Index n = kernel.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double p = kernel(i, j);
      if (!std::isfinite(p) || p < 0.0) {
        throw Error(ErrorCode::NegativeEntry,
                    "P(" + std::to_string(i) + "," + std::to_string(j) + ") = " + std::to_string(p));
      }
    }
    const double row = kernel.row(i).sum();
    if (row > 1.0 + kRowSumSlack) {
      throw Error(ErrorCode::RowSumExceedsOne,
                  "row " + std::to_string(i) + " sums to " + std::to_string(row));
    }
  }

  Chain chain(std::move(kernel), declared, std::move(labels));
  const Mat& p = chain.kernel();

  if (declared == Mode::Ergodic) {
    if (chain.kill_vector().cwiseAbs().maxCoeff() > kRowSumSlack) {
      throw Error(ErrorCode::ModeMismatch, "ergodic mode requires stochastic rows");
    }
    if (!is_irreducible(p)) {
      throw Error(ErrorCode::Reducible, "positive-entry graph is not strongly connected");
    }
    return chain;
  }

  // Absorbing: (I - P) e = 1 must have a nonnegative solution.
  Vec e;
  try {
    e = solve_dense(Mat::Identity(n, n) - p, Vec::Ones(n));
  } catch (const Error& err) {
    if (err.code() != ErrorCode::SingularSystem) throw;
    throw Error(ErrorCode::ModeMismatch, "declared absorbing but I - P is singular");
  }
  if (!e.allFinite() || (e.array() < 1.0 - 1e-9).any()) {
    throw Error(ErrorCode::ModeMismatch, "declared absorbing but expected lifetime is not >= 1");
  }
  // Independent certificate: ||P^k 1||_inf < 1/2 for some k implies rho(P) < 1.
  Vec v = Vec::Ones(n);
  const double cap = 100.0 * e.maxCoeff() + 1000.0;
  std::size_t k = 0;
  while (v.maxCoeff() >= 0.5) {
    v = p * v;
    if (++k > cap) {
      throw Error(ErrorCode::ModeMismatch, "declared absorbing but P^k 1 does not decay");
    }
  }
  return chain;
}

Vec expected_lifetime(const Chain& chain) {
  if (chain.mode() != Mode::Absorbing) {
    throw Error(ErrorCode::ModeMismatch, "expected lifetime requires absorbing mode");
  }
  const auto n = static_cast<Eigen::Index>(chain.size());
  return solve_dense(Mat::Identity(n, n) - chain.kernel(), Vec::Ones(n));
}

Measure invariant_distribution(const Chain& chain) {
  if (chain.mode() != Mode::Ergodic) {
    throw Error(ErrorCode::NotErgodic, "invariant distribution requires ergodic mode");
  }
  const auto n = static_cast<Eigen::Index>(chain.size());
  // gamma (P - I) = 0 with the last equation replaced by sum gamma = 1.
  Mat a = (chain.kernel() - Mat::Identity(n, n)).transpose();
  a.row(n - 1).setOnes();
  Vec rhs = Vec::Zero(n);
  rhs(n - 1) = 1.0;
  Vec gamma = solve_dense(a, rhs);
  if ((gamma.array() <= 0.0).any()) {
    throw Error(ErrorCode::NotErgodic, "invariant law has a nonpositive entry");
  }
  return Measure{gamma / gamma.sum(), 0.0};
}

Vec generator_apply(const Chain& chain, const Vec& f, double f_cemetery) {
  if (static_cast<std::size_t>(f.size()) != chain.size()) {
    throw Error(ErrorCode::DimensionMismatch, "generator argument has wrong length");
  }
  return chain.kernel() * f + chain.kill_vector() * f_cemetery - f;
}

Chain regularize(const Chain& chain, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw Error(ErrorCode::InputError, "killing rate must lie in (0, 1)");
  }
  return Chain((1.0 - beta) * chain.kernel(), Mode::Absorbing, chain.labels());
}

}  // namespace skembed
