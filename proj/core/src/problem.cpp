#include "skembed/problem.hpp"

#include "skembed/error.hpp"

#include <fstream>
#include <sstream>

namespace skembed {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg, ErrorCode code = ErrorCode::InputError) {
  throw Error(code, (path.empty() ? std::string("/") : path) + ": " + msg);
}

const json& require(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "/" + key, "missing required field");
  return *it;
}

const json* optional_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  return (it == obj.end() || it->is_null()) ? nullptr : &*it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::size_t index(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) fail(path, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

Vec vector_of(const json& j, const std::string& path, std::optional<std::size_t> len = {}) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  if (len && j.size() != *len) {
    fail(path, "expected length " + std::to_string(*len) + ", got " + std::to_string(j.size()),
         ErrorCode::DimensionMismatch);
  }
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], path + "/" + std::to_string(i));
  return v;
}

Mat matrix_of(const json& j, const std::string& path, std::optional<std::size_t> rows = {},
              std::optional<std::size_t> cols = {}) {
  if (!j.is_array()) fail(path, "expected an array of rows");
  if (rows && j.size() != *rows) {
    fail(path, "expected " + std::to_string(*rows) + " rows, got " + std::to_string(j.size()), ErrorCode::DimensionMismatch);
  }
  const std::size_t r = j.size();
  const std::size_t c = cols ? *cols : (r ? j[0].size() : 0);
  Mat m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  for (std::size_t i = 0; i < r; ++i) {
    const Vec row = vector_of(j[i], path + "/" + std::to_string(i), c);
    m.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return m;
}

Measure measure_of(const json& j, const std::string& path, std::size_t n, bool allow_cemetery) {
  Measure m;
  if (j.is_array()) {
    m.mass = vector_of(j, path, n);
  } else if (j.is_object()) {
    m.mass = vector_of(require(j, path, "mass"), path + "/mass", n);
    if (const json* c = optional_field(j, "cemetery")) {
      if (!allow_cemetery) fail(path + "/cemetery", "initial law may not charge the cemetery");
      m.cemetery = number(*c, path + "/cemetery");
    }
  } else {
    fail(path, "expected a mass array or an object with \"mass\"");
  }
  if ((m.mass.array() < 0.0).any() || m.cemetery < 0.0) fail(path, "negative mass", ErrorCode::NegativeEntry);
  if (std::abs(m.total() - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "total mass " << m.total() << " differs from 1";
    fail(path, os.str());
  }
  return m;
}

std::optional<double> bound_of(const json& cost, const std::string& path) {
  const json* d = optional_field(cost, "D");
  if (!d) return std::nullopt;
  if (d->is_string() && d->get<std::string>() == "unbounded") return std::nullopt;
  return number(*d, path + "/D");
}

// Flattens a [aux][x] table in augmented order; rows missing from the
// augmented chain are skipped.
Vec table_over_aug(const AugmentedChain& aug, const Mat& table, const std::string& path) {
  Vec out(static_cast<Eigen::Index>(aug.size()));
  for (std::size_t z = 0; z < aug.size(); ++z) {
    const auto a = static_cast<Eigen::Index>(aug.aux_of(z));
    const auto x = static_cast<Eigen::Index>(aug.base_of(z));
    if (a >= table.rows() || x >= table.cols()) fail(path, "table does not cover every augmented state", ErrorCode::DimensionMismatch);
    out(static_cast<Eigen::Index>(z)) = table(a, x);
  }
  return out;
}

struct Built {
  AugmentedChain aug;
  CostModel cost;
};

Built build_cost(const Chain& chain, const Measure& mu, const json* cost_json, ProblemOptions& opts,
                 std::string& kind) {
  const std::size_t n = chain.size();
  if (!cost_json) {
    kind = "running";
    auto aug = build_augmented(chain, TrivialAux{});
    auto cost = running_cost(aug, Vec::Ones(static_cast<Eigen::Index>(n)));
    return {std::move(aug), std::move(cost)};
  }
  const json& c = *cost_json;
  const std::string path = "/cost";
  const json& kind_json = require(c, path, "kind");
  if (!kind_json.is_string()) fail(path + "/kind", "expected a string");
  kind = kind_json.get<std::string>();
  const auto bound = bound_of(c, path);

  if (kind == "running") {
    auto aug = build_augmented(chain, TrivialAux{});
    Vec ell = Vec::Ones(static_cast<Eigen::Index>(n));
    if (const json* l = optional_field(c, "lagrangian")) ell = vector_of(*l, path + "/lagrangian", n);
    auto cost = running_cost(aug, std::move(ell), bound);
    return {std::move(aug), std::move(cost)};
  }

  if (kind == "time") {
    if (const json* t = optional_field(c, "T_max")) opts.t_max = index(*t, path + "/T_max");
    TimeAux spec;
    spec.t_max = opts.t_max;
    if (const json* lam = optional_field(c, "lambda"); lam && !spec.t_max) {
      if (!lam->is_array() || lam->empty()) fail(path + "/lambda", "expected a [t][x] table");
      spec.t_max = lam->size() - 1;
    }
    auto aug = build_augmented(chain, spec);
    const std::size_t rows = aug.horizon() + 1;
    if (const json* poly = optional_field(c, "polynomial")) {
      const Vec coeffs = vector_of(*poly, path + "/polynomial");
      std::vector<double> cs(coeffs.data(), coeffs.data() + coeffs.size());
      auto cost = time_polynomial_cost(aug, cs, bound);
      return {std::move(aug), std::move(cost)};
    }
    const Vec lambda = table_over_aug(aug, matrix_of(require(c, path, "lambda"), path + "/lambda", rows, n), path + "/lambda");
    std::optional<Vec> cem;
    if (const json* j = optional_field(c, "cemetery")) cem = table_over_aug(aug, matrix_of(*j, path + "/cemetery", rows, n), path + "/cemetery");
    std::optional<Mat> grad;
    if (const json* j = optional_field(c, "grad")) grad = Mat(table_over_aug(aug, matrix_of(*j, path + "/grad", rows, n), path + "/grad"));
    auto cost = table_cost(aug, lambda, cem, grad, std::nullopt, bound);
    return {std::move(aug), std::move(cost)};
  }

  if (kind == "initial-state") {
    auto aug = build_augmented(chain, InitialStateAux{mu});
    const Vec lambda = table_over_aug(aug, matrix_of(require(c, path, "lambda"), path + "/lambda", n, n), path + "/lambda");
    std::optional<Vec> cem;
    if (const json* j = optional_field(c, "cemetery")) cem = table_over_aug(aug, matrix_of(*j, path + "/cemetery", n, n), path + "/cemetery");
    std::optional<Mat> grad;
    if (const json* j = optional_field(c, "grad")) grad = Mat(table_over_aug(aug, matrix_of(*j, path + "/grad", n, n), path + "/grad"));
    auto cost = table_cost(aug, lambda, cem, grad, std::nullopt, bound);
    return {std::move(aug), std::move(cost)};
  }

  if (kind == "explicit-aug") {
    ExplicitAux spec;
    const json& aux = require(c, path, "aux");
    if (!aux.is_array() || aux.empty()) fail(path + "/aux", "expected a non-empty array of coordinate arrays");
    for (std::size_t a = 0; a < aux.size(); ++a) spec.coords.push_back(vector_of(aux[a], path + "/aux/" + std::to_string(a)));
    const json& states = require(c, path, "states");
    if (!states.is_array()) fail(path + "/states", "expected an array of [aux, x] pairs");
    for (std::size_t z = 0; z < states.size(); ++z) {
      const std::string p = path + "/states/" + std::to_string(z);
      if (!states[z].is_array() || states[z].size() != 2) fail(p, "expected an [aux, x] pair");
      spec.states.push_back({index(states[z][0], p + "/0"), index(states[z][1], p + "/1")});
    }
    const std::size_t nz = spec.states.size();
    spec.kernel = matrix_of(require(c, path, "P_aug"), path + "/P_aug", nz, nz);
    const json& init = require(c, path, "initial");
    if (!init.is_array() || init.size() != n) fail(path + "/initial", "expected one entry per base state", ErrorCode::DimensionMismatch);
    for (std::size_t x = 0; x < n; ++x) {
      if (init[x].is_null()) {
        spec.initial.push_back(std::nullopt);
      } else {
        spec.initial.push_back(index(init[x], path + "/initial/" + std::to_string(x)));
      }
    }
    auto aug = build_augmented(chain, spec);
    if (const json* l = optional_field(c, "lagrangian")) {
      auto cost = running_cost(aug, vector_of(*l, path + "/lagrangian", nz), bound);
      return {std::move(aug), std::move(cost)};
    }
    const Vec lambda = vector_of(require(c, path, "lambda"), path + "/lambda", nz);
    std::optional<Vec> cem;
    if (const json* j = optional_field(c, "cemetery")) cem = vector_of(*j, path + "/cemetery", nz);
    std::optional<Mat> grad;
    if (const json* j = optional_field(c, "grad")) grad = matrix_of(*j, path + "/grad", nz);
    std::optional<Mat> grad_cem;
    if (const json* j = optional_field(c, "grad_cemetery")) grad_cem = matrix_of(*j, path + "/grad_cemetery", nz);
    auto cost = table_cost(aug, lambda, cem, grad, grad_cem, bound);
    return {std::move(aug), std::move(cost)};
  }

  fail(path + "/kind", "unknown cost kind \"" + kind + "\" (running, time, initial-state, explicit-aug)");
}

ProblemOptions options_of(const json* j) {
  ProblemOptions o;
  if (!j) return o;
  const std::string path = "/options";
  if (!j->is_object()) fail(path, "expected an object");
  if (const json* v = optional_field(*j, "tol")) o.tol = number(*v, path + "/tol");
  if (const json* v = optional_field(*j, "seed")) {
    if (!v->is_number_integer() || v->get<long long>() < 0) fail(path + "/seed", "expected a nonnegative integer");
    o.seed = v->get<std::uint64_t>();
  }
  if (const json* v = optional_field(*j, "T_max")) o.t_max = index(*v, path + "/T_max");
  if (const json* v = optional_field(*j, "beta_schedule")) {
    const Vec b = vector_of(*v, path + "/beta_schedule");
    o.beta_schedule.assign(b.data(), b.data() + b.size());
    for (double beta : o.beta_schedule)
      if (!(beta > 0.0 && beta < 1.0)) fail(path + "/beta_schedule", "killing rates must lie in (0, 1)");
  }
  if (const json* v = optional_field(*j, "method")) {
    if (!v->is_string()) fail(path + "/method", "expected \"lp\", \"iterative\" or \"both\"");
    try {
      o.method = parse_method(v->get<std::string>());
    } catch (const Error& e) {
      fail(path + "/method", e.detail());
    }
  }
  if (const json* v = optional_field(*j, "n_paths")) o.n_paths = index(*v, path + "/n_paths");
  return o;
}

}  // namespace

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::Lp: return "lp";
    case Method::Iterative: return "iterative";
    case Method::Both: return "both";
  }
  return "lp";
}

Method parse_method(std::string_view s) {
  if (s == "lp") return Method::Lp;
  if (s == "iterative") return Method::Iterative;
  if (s == "both") return Method::Both;
  throw Error(ErrorCode::InputError, "unknown method \"" + std::string(s) + "\"");
}

Problem parse_problem(const json& doc) {
  if (!doc.is_object()) fail("", "problem must be a JSON object");
  if (const json* s = optional_field(doc, "schema")) {
    if (!s->is_number_integer() || s->get<int>() != kSchemaVersion) fail("/schema", "unsupported schema version");
  }
  const json& mode_json = require(doc, "", "mode");
  if (!mode_json.is_string()) fail("/mode", "expected \"absorbing\" or \"ergodic\"");
  const std::string mode_str = mode_json.get<std::string>();
  Mode mode;
  if (mode_str == "absorbing") {
    mode = Mode::Absorbing;
  } else if (mode_str == "ergodic") {
    mode = Mode::Ergodic;
  } else {
    fail("/mode", "expected \"absorbing\" or \"ergodic\"");
  }

  const json& pj = require(doc, "", "P");
  if (!pj.is_array() || pj.empty()) fail("/P", "expected a non-empty square array");
  const std::size_t n = pj.size();
  const Mat kernel = matrix_of(pj, "/P", n, n);

  std::vector<std::string> labels;
  if (const json* s = optional_field(doc, "states")) {
    if (!s->is_array() || s->size() != n) fail("/states", "expected one label per row of P", ErrorCode::DimensionMismatch);
    for (std::size_t i = 0; i < n; ++i) {
      const json& l = (*s)[i];
      labels.push_back(l.is_string() ? l.get<std::string>() : l.dump());
    }
  }

  Chain chain = [&] {
    try {
      return validate_chain(kernel, mode, labels);
    } catch (const Error& e) {
      throw Error(e.code(), "/P: " + e.detail());
    }
  }();

  Measure mu = measure_of(require(doc, "", "mu"), "/mu", n, false);
  Measure nu = measure_of(require(doc, "", "nu"), "/nu", n, true);
  if (mode == Mode::Ergodic && nu.cemetery > 0.0) fail("/nu/cemetery", "ergodic chains have no cemetery");

  ProblemOptions opts = options_of(optional_field(doc, "options"));
  std::string kind;
  Built built = build_cost(chain, mu, optional_field(doc, "cost"), opts, kind);
  return Problem{std::move(chain), std::move(built.aug), std::move(built.cost), std::move(mu), std::move(nu),
                 std::move(kind), std::move(opts)};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InputError, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte ? e.byte - 1 : 0, text.size()); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::InputError, path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                           ": JSON syntax error");
  }
}

Problem load_problem(const std::filesystem::path& path) {
  const json doc = read_json_file(path);
  try {
    return parse_problem(doc);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + " " + e.detail());
  }
}

}  // namespace skembed
