#include "skembed/pipeline.hpp"

#include "skembed/dual.hpp"
#include "skembed/lp.hpp"
#include "skembed/plot.hpp"
#include "skembed/potential.hpp"
#include "skembed/sim.hpp"
#include "skembed/snell.hpp"
#include "skembed/verify.hpp"

#include <cmath>
#include <sstream>

namespace skembed {

using nlohmann::json;

json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

namespace {

Vec vec_from(const json& j, const std::string& what, Eigen::Index len) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != len) {
    throw Error(ErrorCode::InputError, "report field " + what + " has the wrong shape");
  }
  Vec v(len);
  for (Eigen::Index i = 0; i < len; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) throw Error(ErrorCode::InputError, "report field " + what + " is not numeric");
    v(i) = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

json header(const std::string& command, const Problem& p) {
  json r;
  r["schema"] = kSchemaVersion;
  r["command"] = command;
  r["mode"] = to_string(p.chain.mode());
  json labels = json::array();
  for (std::size_t x = 0; x < p.chain.size(); ++x) labels.push_back(p.chain.label(x));
  r["states"] = labels;
  r["cost_kind"] = p.cost_kind;
  r["augmented_states"] = p.aug.size();
  if (p.aug.kind() == AuxKind::Time) {
    r["horizon"] = {{"T_max", p.aug.horizon()},
                    {"truncation_mass", p.aug.truncation_mass()},
                    {"too_small", p.aug.horizon_too_small()}};
  }
  return r;
}

json cost_checks(const Problem& p) {
  json c;
  const auto sub = check_submartingale(p.aug, p.cost);
  c["submartingale"] = {{"pass", sub.pass}, {"min_lagrangian", sub.worst_value}, {"max_initial_cost", sub.initial_value}};
  if (sub.worst_state) c["submartingale"]["worst_state"] = p.aug.label(*sub.worst_state);
  if (sub.initial_violation) c["submartingale"]["initial_violation"] = p.aug.label(*sub.initial_violation);
  const auto semi = check_semi_supermartingale(p.aug, p.cost);
  c["semi_supermartingale"] = {{"D_star", semi.d_star}, {"pass", semi.pass}};
  c["semi_supermartingale"]["declared_D"] = semi.declared ? json(*semi.declared) : json("unbounded");
  if (p.cost.grad) {
    const auto tw = check_twist(p.aug, p.cost);
    c["twist"] = {{"status", tw.status == TwistStatus::Holds ? "holds" : "inconclusive"},
                  {"axis", tw.axis},
                  {"direction", tw.sign},
                  {"margin", tw.margin},
                  {"required_margin", 1e-9},
                  {"checked_states", tw.checked_states}};
    if (tw.witness) c["twist"]["witness"] = p.aug.label(*tw.witness);
  }
  return c;
}

json certificate_json(const Problem& p, const BalayageResult& bal) {
  json c;
  c["ordered"] = bal.ordered;
  c["decided_by"] = bal.ergodic ? "ergodic rule (supermedian functions are constant)" : "embedding LP feasibility";
  if (bal.certificate) {
    c["certificate"] = {{"phi", to_json(*bal.certificate)},
                        {"gap", bal.gap},
                        {"supermedian", is_supermedian(p.chain, *bal.certificate)},
                        {"verified", bal.verified}};
  }
  return c;
}

void require_absorbing(const Problem& p, const char* command) {
  if (p.chain.mode() == Mode::Ergodic && p.aug.kind() != AuxKind::Time) {
    throw Error(ErrorCode::ModeMismatch, std::string(command) +
                                             " needs an absorbing chain or a Time auxiliary; use the ergodic command");
  }
}

}  // namespace

CommandOutput error_output(const std::string& command, const Error& e) {
  CommandOutput out;
  out.report["schema"] = kSchemaVersion;
  out.report["command"] = command;
  out.report["status"] = "error";
  out.report["error"] = {{"code", to_string(e.code())}, {"message", e.detail()}};
  out.exit_code = exit_code_for(e.code());
  return out;
}

CommandOutput run_check(const Problem& p, const RunOptions&) {
  CommandOutput out;
  json& r = out.report;
  r = header("check", p);
  r["chain"] = {{"valid", true}};
  if (p.chain.mode() == Mode::Absorbing) {
    r["chain"]["expected_lifetime"] = to_json(expected_lifetime(p.chain));
  } else {
    r["chain"]["invariant_law"] = to_json(invariant_distribution(p.chain).mass);
  }
  r["cost"] = cost_checks(p);
  const auto bal = check_balayage(p.chain, p.mu, p.nu);
  r["balayage"] = certificate_json(p, bal);
  r["ordered"] = bal.ordered;
  r["status"] = bal.ordered ? "ordered" : "not-ordered";
  out.exit_code = bal.ordered ? 0 : 2;
  return out;
}

CommandOutput run_solve(const Problem& p, const RunOptions& o) {
  require_absorbing(p, "solve");
  const double tol = o.tol ? *o.tol : p.options.tol;
  const Method method = o.method ? *o.method : p.options.method;
  CommandOutput out;
  json& r = out.report;
  r = header("solve", p);
  r["method"] = to_string(method);
  r["tolerances"] = {{"gap", tol},
                     {"lp_feasibility", 1e-9},
                     {"lp_optimality", 1e-9},
                     {"contact", "1e-7 * (1 + |V|)"},
                     {"martingale", tol},
                     {"stop_go_slack", "1e-9 * (1 + |V|)"},
                     {"twist_margin", 1e-9},
                     {"iterative_gap", 1e-6}};
  r["cost"] = cost_checks(p);
  const bool submartingale = r["cost"]["submartingale"]["pass"].get<bool>();

  EmbeddingLpResult lp;
  try {
    lp = primal_embedding_lp(p.aug, p.cost, p.mu, p.nu);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Infeasible) throw;
    const auto bal = check_balayage(p.chain, p.mu, p.nu);
    r["status"] = "infeasible";
    r["message"] = e.detail();
    r["balayage"] = certificate_json(p, bal);
    out.exit_code = 2;
    return out;
  }
  const auto& occ = lp.occ;
  const auto dual = dual_from_lp(p.aug, p.cost, p.mu, p.nu, lp, tol);
  const Vec& v = dual.v_snell;
  const Vec alpha = doob_meyer(p.aug, p.cost, v);
  const auto opt = verify_optimality(p.aug, p.cost, p.mu, dual.psi, v, occ, tol);
  const auto sg = check_stop_go(p.aug, p.cost, v, occ);
  const auto rule = extract_stopping_rule(occ);
  const auto pf = pushforward(p.aug, p.cost, rule, p.mu);
  const double law_error = std::max(sup_norm(pf.law - p.nu.mass), std::abs(pf.killed - p.nu.cemetery));

  r["objective"] = occ.objective;
  r["expected_time"] = occ.expected_time();
  r["killed_mass"] = occ.killed_mass;
  r["lp_iterations"] = lp.iterations;
  r["psi"] = to_json(dual.psi);
  r["dual_value"] = dual.value;
  r["gap"] = dual.gap;
  r["value_function"] = to_json(v);
  r["occupation"] = {{"u", to_json(occ.u)}, {"s", to_json(occ.s)}};
  r["stopping_rule"] = {{"p", to_json(rule.p)}, {"deterministic", rule.deterministic}};
  json labels = json::array();
  for (std::size_t z = 0; z < p.aug.size(); ++z) labels.push_back(p.aug.label(z));
  r["augmented_labels"] = labels;

  json& ver = r["verification"];
  ver["optimality"] = {{"support_in_contact", opt.support_in_contact},
                       {"worst_support_slack", opt.worst_support_slack},
                       {"contact_tol", opt.ctol},
                       {"martingale", opt.martingale},
                       {"sum_u_alpha", opt.sum_u_alpha},
                       {"zero_gap", opt.zero_gap},
                       {"gap", opt.gap},
                       {"pass", opt.pass()}};
  if (opt.worst_support_state) ver["optimality"]["worst_support_state"] = p.aug.label(*opt.worst_support_state);
  if (opt.worst_alpha_state) ver["optimality"]["worst_alpha_state"] = p.aug.label(*opt.worst_alpha_state);
  json viol = json::array();
  for (const auto& v2 : sg.violations) {
    viol.push_back({{"base", p.chain.label(v2.base)}, {"go", p.aug.label(v2.go)}, {"stop", p.aug.label(v2.stop)}, {"excess", v2.excess}});
  }
  ver["stop_go"] = {{"pairs_checked", sg.pairs_checked},
                    {"slack", sg.slack},
                    {"violations", viol},
                    {"pass", sg.pass()},
                    {"note", "checked on (aux, state) pairs with one-step continuation"}};
  ver["pushforward"] = {{"law_error", law_error}, {"cost_error", std::abs(pf.expected_cost - occ.objective)},
                        {"pass", law_error <= 1e-10 && std::abs(pf.expected_cost - occ.objective) <= tol}};

  if (submartingale) {
    const Vec mu_aug = lift_initial(p.aug, p.mu);
    const double k = choose_K(p.aug, p.cost);
    const Vec bar = normalize_psi(p.aug, p.cost, dual.psi).psi_bar;
    const Vec vbar = snell_envelope(p.aug, p.cost, bar).v;
    const Vec boxed = psi_max(p.aug, mu_aug, vbar).cwiseMax(-k).cwiseMin(0.0);
    const double u_boxed = dual_value(p.aug, p.cost, p.mu, p.nu, boxed);
    r["attainment"] = {{"K", k}, {"psi", to_json(boxed)}, {"value", u_boxed}, {"gap", occ.objective - u_boxed}};
  }

  const Vec psi_sharp = p.cost.grad ? complementary_dual(p.aug, p.cost, p.mu, p.nu, lp).psi
                                    : sharpen_dual(p.aug, p.cost, p.nu, dual.psi);
  const Vec v_sharp = snell_envelope(p.aug, p.cost, psi_sharp).v;
  bool barrier_ok = true;
  if (p.cost.grad) {
    const auto tw = check_twist(p.aug, p.cost);
    if (tw.status == TwistStatus::Holds) {
      const auto br = barrier_report(p.aug, p.cost, p.mu, p.nu, psi_sharp, v_sharp, occ, tw);
      json mv = json::array();
      for (auto [a, b] : br.monotone_violations) mv.push_back({p.aug.label(a), p.aug.label(b)});
      r["barrier"] = {{"direction", br.direction},   {"axis", br.axis},
                      {"bang_bang", br.bang_bang},   {"worst_fraction", br.worst_fraction},
                      {"monotone", br.monotone},     {"monotone_violations", mv},
                      {"nu_error", br.nu_error},     {"reproduces_nu", br.reproduces_nu},
                      {"cost_error", br.cost_error}, {"reproduces_cost", br.reproduces_cost},
                      {"lp_distance", br.lp_distance}, {"agrees_with_lp", br.agrees_with_lp},
                      {"pass", br.pass()},           {"caveat", br.caveat}};
      barrier_ok = br.pass();
    }
  }

  if (method != Method::Lp) {
    if (!submartingale) {
      r["iterative"] = {{"skipped", "cost fails the submartingale check"}};
    } else {
      DualOptions dopts;
      dopts.target = occ.objective;
      const auto it = solve_dual_iterative(p.aug, p.cost, p.mu, p.nu, dopts);
      r["iterative"] = {{"psi", to_json(it.psi)},
                        {"value", it.value},
                        {"gap", it.gap},
                        {"iterations", it.iterations},
                        {"K", it.k_box},
                        {"touches_lower_box", it.touches_lower_box},
                        {"converged", it.converged}};
      if (it.touches_lower_box) r["iterative"]["warning"] = "psi touches the lower box bound; K may be too small";
    }
  }

  if (p.aug.aux_dim() <= 1) {
    const auto contact = contact_set(p.aug, psi_sharp, v_sharp);
    BarrierCells cells;
    cells.reachable = reachable_from(p.aug, lift_initial(p.aug, p.mu));
    cells.contact = contact.mask;
    cells.slack = contact.slack;
    cells.stopped.resize(p.aug.size());
    for (std::size_t z = 0; z < p.aug.size(); ++z) cells.stopped[z] = occ.s(static_cast<Eigen::Index>(z)) > 1e-9;
    std::ostringstream title;
    title << "stopping region, objective " << occ.objective;
    out.svg = barrier_svg(p.aug, cells, title.str());
  }

  std::ostringstream csv;
  csv.precision(17);
  csv << "state,aux,base,u,s,p,slack,alpha\n";
  for (std::size_t z = 0; z < p.aug.size(); ++z) {
    const auto i = static_cast<Eigen::Index>(z);
    csv << '"' << p.aug.label(z) << "\"," << p.aug.aux_of(z) << ',' << p.chain.label(p.aug.base_of(z)) << ',' << occ.u(i)
        << ',' << occ.s(i) << ',' << rule.p(i) << ',' << (v(i) - dual.psi(static_cast<Eigen::Index>(p.aug.base_of(z))))
        << ',' << alpha(i) << '\n';
  }
  out.csv = csv.str();

  const bool ok = opt.pass() && sg.pass() && ver["pushforward"]["pass"].get<bool>() && barrier_ok;
  r["status"] = ok ? "optimal" : "verification-failed";
  out.exit_code = ok ? 0 : 3;
  return out;
}

CommandOutput run_ergodic(const Problem& p, const RunOptions& o) {
  if (p.chain.mode() != Mode::Ergodic) throw Error(ErrorCode::NotErgodic, "the ergodic command needs mode \"ergodic\"");
  const double tol = o.tol ? *o.tol : p.options.tol;
  CommandOutput out;
  json& r = out.report;
  r = header("ergodic", p);
  r["tolerances"] = {{"agreement", tol}, {"local_time", 1e-9}, {"argmax", 1e-9}};
  const Measure gamma = invariant_distribution(p.chain);
  const auto mt = ergodic_min_time(p.chain, p.mu, p.nu);
  const auto occ = ergodic_filling_lp(p.chain, p.mu, p.nu);
  const auto lt = local_time_check(occ, mt.halting_point);
  r["invariant_law"] = to_json(gamma.mass);
  r["potential_mu"] = to_json(mt.u_mu);
  r["potential_nu"] = to_json(mt.u_nu);
  r["value"] = mt.value;
  r["halting_point"] = p.chain.label(mt.halting_point);
  json am = json::array();
  json lts = json::object();
  bool any_zero = false;
  for (std::size_t x : mt.argmax) {
    am.push_back(p.chain.label(x));
    const auto l = local_time_check(occ, x);
    lts[p.chain.label(x)] = l.visits;
    any_zero = any_zero || l.optimal;
  }
  r["halting_set"] = am;
  r["filling"] = {{"value", occ.objective}, {"u", to_json(occ.u)}};
  r["local_time"] = {{"at_halting_point", lt.visits}, {"per_maximizer", lts}, {"zero_somewhere", any_zero}};
  const double diff = std::abs(occ.objective - mt.value);
  r["agreement"] = {{"difference", diff}, {"pass", diff <= tol}};

  const auto rule = extract_stopping_rule(occ);
  const auto reg = regularized_expected_time(p.chain, rule, p.mu, p.options.beta_schedule, occ.objective);
  r["regularized"] = {{"betas", reg.betas},
                      {"expected_times", reg.expected_times},
                      {"killed", reg.killed},
                      {"extrapolated", reg.extrapolated},
                      {"error", reg.error},
                      {"pass", reg.error <= 1e-4 * (1.0 + std::abs(occ.objective))}};
  const bool ok = diff <= tol && any_zero;
  r["status"] = ok ? "optimal" : "verification-failed";
  out.exit_code = ok ? 0 : 3;
  return out;
}

CommandOutput run_simulate(const Problem& p, const RunOptions& o) {
  require_absorbing(p, "simulate");
  CommandOutput out;
  json& r = out.report;
  r = header("simulate", p);
  const auto lp = primal_embedding_lp(p.aug, p.cost, p.mu, p.nu);
  const auto dual = dual_from_lp(p.aug, p.cost, p.mu, p.nu, lp, o.tol ? *o.tol : p.options.tol);
  SimConfig cfg;
  cfg.n_paths = o.n_paths ? *o.n_paths : p.options.n_paths;
  cfg.seed = o.seed ? *o.seed : p.options.seed;
  cfg.rule = extract_stopping_rule(lp.occ);
  cfg.threads = o.threads;
  const auto exact = pushforward(p.aug, p.cost, cfg.rule, p.mu);
  const auto st = sample_paths(p.aug, p.cost, p.mu, cfg, &dual.v_snell);
  const Measure exact_law = Measure::from_mass(exact.law, exact.killed);
  const auto cmp = compare_empirical(st, exact_law, exact.expected_time, exact.expected_cost);
  r["seed"] = cfg.seed;
  r["n_paths"] = cfg.n_paths;
  r["max_steps"] = st.max_steps;
  r["truncated"] = st.truncated;
  r["truncation_bound"] = st.truncation_bound;
  r["empirical_law"] = to_json(st.law());
  r["empirical_killed"] = st.killed_frequency();
  r["exact_law"] = to_json(exact.law);
  r["exact_killed"] = exact.killed;
  r["mean_time"] = {{"empirical", st.mean_time}, {"se", st.se_time}, {"exact", exact.expected_time}};
  r["mean_cost"] = {{"empirical", st.mean_cost}, {"se", st.se_cost}, {"exact", exact.expected_cost}, {"lp_objective", lp.occ.objective}};
  r["martingale_increment"] = {{"mean", *st.mean_martingale}, {"se", *st.se_martingale}};
  r["comparison"] = {{"tv", cmp.tv},
                     {"tv_threshold", cmp.tv_threshold},
                     {"max_abs_z", std::isfinite(cmp.max_abs_z) ? json(cmp.max_abs_z) : json("inf")},
                     {"z", to_json(cmp.z)},
                     {"low_power", cmp.low_power},
                     {"pass", cmp.pass}};
  std::ostringstream csv;
  csv.precision(17);
  write_frequency_csv(csv, p.chain, st, exact_law);
  out.csv = csv.str();
  r["status"] = cmp.pass ? "concordant" : "discordant";
  out.exit_code = cmp.pass ? 0 : 3;
  return out;
}

CommandOutput run_report(const Problem& p, const json& prev, const RunOptions& o) {
  require_absorbing(p, "report");
  const double tol = o.tol ? *o.tol : p.options.tol;
  if (!prev.is_object() || prev.value("command", "") != "solve" || !prev.contains("psi") || !prev.contains("occupation")) {
    throw Error(ErrorCode::InputError, "expected a solve report with psi and occupation");
  }
  const auto nz = static_cast<Eigen::Index>(p.aug.size());
  const Vec psi = vec_from(prev["psi"], "psi", static_cast<Eigen::Index>(p.chain.size()));
  OccupationSolution occ;
  occ.u = vec_from(prev["occupation"]["u"], "occupation.u", nz);
  occ.s = vec_from(prev["occupation"]["s"], "occupation.s", nz);
  const Vec v = snell_envelope(p.aug, p.cost, psi).v;
  const auto opt = verify_optimality(p.aug, p.cost, p.mu, psi, v, occ, tol);
  const Vec marg = project_base(p.aug, occ.s);
  const Vec mu_aug = lift_initial(p.aug, p.mu);
  const Vec balance = occ.u + occ.s - p.aug.kernel().transpose() * occ.u - mu_aug;
  CommandOutput out;
  json& r = out.report;
  r = header("report", p);
  r["tolerances"] = {{"gap", tol}, {"feasibility", 1e-9}};
  r["primal"] = opt.primal;
  r["dual_value"] = opt.dual;
  r["gap"] = opt.gap;
  r["reported_gap"] = prev.value("gap", std::nan(""));
  r["balance_residual"] = sup_norm(balance);
  r["marginal_residual"] = sup_norm(marg - p.nu.mass);
  r["support_in_contact"] = opt.support_in_contact;
  r["sum_u_alpha"] = opt.sum_u_alpha;
  const bool feasible = sup_norm(balance) <= 1e-9 && sup_norm(marg - p.nu.mass) <= 1e-9 && (occ.u.array() >= -1e-12).all() &&
                        (occ.s.array() >= -1e-12).all();
  r["feasible"] = feasible;
  const bool ok = feasible && opt.pass();
  r["status"] = ok ? "certified" : "not-certified";
  out.exit_code = ok ? 0 : 3;
  return out;
}

}  // namespace skembed
