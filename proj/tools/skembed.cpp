#include "skembed/pipeline.hpp"
#include "skembed/problem.hpp"
#include "skembed/sim.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <thread>

namespace {

using skembed::CommandOutput;
using skembed::Error;
using skembed::ErrorCode;

struct Args {
  std::vector<std::string> problems;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<std::size_t> paths;
  std::string plot;
  std::string out;
  std::string csv;
  std::string in;
};

CommandOutput run_one(const std::string& command, const std::string& file, const Args& args) {
  try {
    const auto problem = skembed::load_problem(file);
    skembed::RunOptions o;
    o.tol = args.tol;
    o.seed = args.seed;
    if (args.method) o.method = skembed::parse_method(*args.method);
    o.n_paths = args.paths;
    CommandOutput result;
    if (command == "check") {
      result = skembed::run_check(problem, o);
    } else if (command == "solve") {
      result = skembed::run_solve(problem, o);
    } else if (command == "ergodic") {
      result = skembed::run_ergodic(problem, o);
    } else if (command == "simulate") {
      result = skembed::run_simulate(problem, o);
    } else {
      if (args.in.empty()) throw Error(ErrorCode::InputError, "report needs --in <solve report>");
      result = skembed::run_report(problem, skembed::read_json_file(args.in), o);
    }
    result.report["problem"] = file;
    return result;
  } catch (const Error& e) {
    auto out = skembed::error_output(command, e);
    out.report["problem"] = file;
    return out;
  } catch (const std::exception& e) {
    auto out = skembed::error_output(command, Error(ErrorCode::NumericalBreakdown, e.what()));
    out.report["problem"] = file;
    return out;
  }
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) {
    std::cerr << "skembed: cannot write " << path << '\n';
    return false;
  }
  f << text;
  return true;
}

int dispatch(const std::string& command, const Args& args) {
  if (args.problems.size() > 1 && (!args.plot.empty() || !args.csv.empty())) {
    std::cerr << "skembed: --plot and --csv take a single problem file\n";
    return 1;
  }
  std::vector<CommandOutput> results(args.problems.size());
  const unsigned cap = std::min<unsigned>(skembed::default_threads(), static_cast<unsigned>(args.problems.size()));
  if (cap <= 1) {
    for (std::size_t i = 0; i < args.problems.size(); ++i) results[i] = run_one(command, args.problems[i], args);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < cap; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < args.problems.size(); i = next++) results[i] = run_one(command, args.problems[i], args);
      });
    }
    for (auto& th : pool) th.join();
  }

  int code = 0;
  for (const auto& r : results) code = std::max(code, r.exit_code);

  nlohmann::json doc;
  if (results.size() == 1) {
    doc = results.front().report;
  } else {
    doc = nlohmann::json::array();
    for (const auto& r : results) doc.push_back(r.report);
  }
  const std::string text = doc.dump(2) + "\n";
  if (args.out.empty()) {
    std::cout << text;
  } else if (!write_file(args.out, text)) {
    return std::max(code, 1);
  }
  if (results.size() == 1) {
    const auto& r = results.front();
    if (!args.plot.empty()) {
      if (r.svg) {
        if (!write_file(args.plot, *r.svg)) return std::max(code, 1);
      } else if (r.exit_code == 0) {
        std::cerr << "skembed: no plot for this command or problem\n";
      }
    }
    if (!args.csv.empty() && r.csv && !write_file(args.csv, *r.csv)) return std::max(code, 1);
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal Skorokhod embedding on finite Markov chains"};
  app.require_subcommand(1);
  Args args;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("problem", args.problems, "problem.json file(s)")->required()->check(CLI::ExistingFile);
    sub->add_option("--tol", args.tol, "gap / agreement tolerance (default 1e-8)");
    sub->add_option("--out", args.out, "write the JSON report here instead of stdout");
  };

  auto* check = app.add_subcommand("check", "validate the chain and cost, decide balayage order");
  add_common(check);
  auto* solve = app.add_subcommand("solve", "optimal embedding with certified dual");
  add_common(solve);
  solve->add_option("--method", args.method, "lp, iterative or both")->check(CLI::IsMember({"lp", "iterative", "both"}));
  solve->add_option("--plot", args.plot, "SVG of the stopping region");
  solve->add_option("--csv", args.csv, "CSV of the occupation table");
  auto* ergodic = app.add_subcommand("ergodic", "minimal expected time embedding on an ergodic chain");
  add_common(ergodic);
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo check of the optimal rule");
  add_common(simulate);
  simulate->add_option("--seed", args.seed, "RNG seed (default 42)");
  simulate->add_option("--paths", args.paths, "number of paths (default 100000)");
  simulate->add_option("--csv", args.csv, "CSV of empirical and exact frequencies");
  auto* report = app.add_subcommand("report", "re-verify a solve report");
  add_common(report);
  report->add_option("--in", args.in, "solve report JSON")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  for (auto* sub : {check, solve, ergodic, simulate, report}) {
    if (sub->parsed()) return dispatch(sub->get_name(), args);
  }
  return 1;
}
