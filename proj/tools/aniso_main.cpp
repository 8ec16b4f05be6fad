// Command-line front end: declarative problem configs in, solves and
// verification reports out.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "aniso/config.hpp"
#include "aniso/expr.hpp"
#include "aniso/oracles.hpp"
#include "aniso/report.hpp"
#include "aniso/strutil.hpp"

namespace fs = std::filesystem;
using namespace aniso;

namespace {

struct CliArgs {
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::optional<long> seed;
  std::optional<int> threads;
  std::optional<int> resolution;
};

RunConfig load_config(const CliArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw std::invalid_argument("cannot read config file " + args.config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    cfg = parse_config(buf.str());
  }
  cfg.command = args.command;
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.seed) cfg.seed = static_cast<std::uint64_t>(*args.seed);
  if (args.threads) cfg.threads = *args.threads;
  if (args.resolution) {
    cfg.resolution = *args.resolution;
    cfg.resolutions = {*args.resolution};
  }
  return cfg;
}

void prepare_out(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  write_text_atomic(cfg.out_dir + "/config.echo", canonical_print(cfg));
}

ordered_json problem_echo(const RunConfig& cfg) {
  ordered_json j;
  j["dim"] = cfg.dim;
  j["norm"] = cfg.norm_spec;
  j["gamma"] = cfg.gamma;
  j["gamma_prime"] = holder_conjugate(cfg.gamma);
  j["q"] = cfg.q;
  j["delta"] = data_exponent(cfg.dim, cfg.gamma, cfg.q);
  if (cfg.gamma < cfg.dim) j["chi"] = sobolev_chi(cfg.dim, cfg.gamma);
  j["resolution"] = cfg.resolution;
  j["boundary"] = cfg.boundary_expr;
  return j;
}

DiscreteField field_from_expr(const Problem& p, const std::string& expr_text) {
  Expr e = Expr::parse(expr_text, p.grid->dim());
  return DiscreteField(*p.grid, [&](const VecN& x) { return e(x); });
}

int cmd_solve(const RunConfig& cfg) {
  Problem p = cfg.make_problem();
  SolveOptions opt;
  opt.tolerance = cfg.tolerance;
  opt.max_iterations = cfg.max_iterations;
  opt.epsilon_regularization = cfg.epsilon_regularization;
  opt.acceleration = cfg.acceleration;

  DiscreteField u;
  SolveReport rep;
  bool converged = true;
  try {
    auto [uu, rr] = solve(p, opt);
    u = std::move(uu);
    rep = std::move(rr);
  } catch (const SolveError& e) {
    u = e.best_field;
    rep = e.report;
    converged = false;
  }

  write_field_csv(u, cfg.out_dir + "/solution.csv");
  {
    std::ostringstream trace;
    trace << "iteration,energy\n";
    for (size_t k = 0; k < rep.energy_trace.size(); ++k)
      trace << k << "," << format_double(rep.energy_trace[k]) << "\n";
    write_text_atomic(cfg.out_dir + "/energy_trace.csv", trace.str());
  }
  ordered_json j;
  j["schema"] = 1;
  j["command"] = "solve";
  j["seed"] = cfg.seed;
  j["problem"] = problem_echo(cfg);
  j["converged"] = converged;
  j["iterations"] = rep.iterations;
  j["initial_residual"] = json_number(rep.initial_residual);
  j["final_residual"] = json_number(rep.final_residual);
  j["line_search_failures"] = rep.line_search_failures;
  j["energy"] = json_number(rep.energy_trace.empty() ? 0.0 : rep.energy_trace.back());
  write_text_atomic(cfg.out_dir + "/report.json", j.dump(2) + "\n");
  std::cout << (converged ? "solved" : "NOT CONVERGED") << ": iterations " << rep.iterations
            << ", residual " << rep.final_residual << ", outputs in " << cfg.out_dir << "\n";
  return converged ? 0 : 1;
}

int cmd_classify(const RunConfig& cfg) {
  Problem p = cfg.make_problem();
  DiscreteField u;
  if (!cfg.u_expr.empty()) {
    u = field_from_expr(p, cfg.u_expr);
  } else {
    SolveOptions opt;
    opt.tolerance = cfg.tolerance;
    opt.max_iterations = cfg.max_iterations;
    auto [uu, rr] = solve(p, opt);
    u = std::move(uu);
  }
  Classification cls = classify(p, u, cfg.classify_tol);
  ordered_json j;
  j["schema"] = 1;
  j["command"] = "classify";
  j["problem"] = problem_echo(cfg);
  j["field"] = cfg.u_expr.empty() ? "(solved)" : cfg.u_expr;
  j["tolerance"] = cfg.classify_tol;
  j["classification"] = to_string(cls);
  write_text_atomic(cfg.out_dir + "/report.json", j.dump(2) + "\n");
  std::cout << "classification: " << to_string(cls) << "\n";
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  Problem p = cfg.make_problem();
  SolveOptions opt;
  opt.tolerance = cfg.tolerance;
  opt.max_iterations = cfg.max_iterations;
  auto [u, rep] = solve(p, opt);

  double s_max = 0.0;
  for (Index v : p.grid->free_vertices()) s_max = std::max(s_max, p.hat_scale[v]);
  const double class_tol = 10.0 * std::max(rep.final_residual, 1e-14) * s_max;
  Classification cls = classify(p, u, class_tol);

  const VerificationConfig& vc = cfg.checks;
  vc.validate(cfg.dim, cfg.gamma, cfg.q);
  VecN center = VecN::Zero(cfg.dim);
  if (!vc.centers.empty()) center = vc.centers.front();

  auto enabled = [&](const char* name) {
    return std::find(cfg.enabled_checks.begin(), cfg.enabled_checks.end(), name) !=
           cfg.enabled_checks.end();
  };

  ordered_json j;
  j["schema"] = 1;
  j["command"] = "verify";
  j["problem"] = problem_echo(cfg);
  j["classification"] = to_string(cls);
  j["residual"] = json_number(rep.final_residual);
  ordered_json recs = ordered_json::array();
  auto add = [&](const char* check, double r, double R, double ratio, bool degenerate = false) {
    ordered_json jr;
    jr["check"] = check;
    if (r > 0) jr["r"] = r;
    jr["R"] = R;
    jr["ratio"] = json_number(ratio);
    if (degenerate) jr["degenerate"] = true;
    recs.push_back(jr);
  };
  if (enabled("caccioppoli"))
    add("caccioppoli", 0, vc.caccioppoli_R, caccioppoli_ratio(p, u, center, vc.caccioppoli_R));
  if (enabled("sup_bound"))
    for (const auto& [r, R] : vc.sup_radii)
      add("sup_bound", r, R, sup_bound_ratio(p, u, center, r, R, vc.p));
  if (enabled("weak_harnack"))
    add("weak_harnack", 0, vc.weak_harnack_R,
        weak_harnack_ratio(p, u, center, vc.weak_harnack_R, vc.theta, vc.tau, vc.p));
  if (enabled("harnack")) {
    HarnackResult hr = harnack_ratio(p, u, center, vc.harnack_R);
    add("harnack", 0, vc.harnack_R, hr.ratio, hr.degenerate);
  }
  if (enabled("oscillation")) {
    auto profile = oscillation_profile(u, center, vc.osc_R0, vc.osc_levels);
    std::ostringstream csv;
    csv << "radius,osc\n";
    for (const auto& [r, osc] : profile)
      csv << format_double(r) << "," << format_double(osc) << "\n";
    write_text_atomic(cfg.out_dir + "/profile.csv", csv.str());
    double floor = vc.tail_floor;
    if (floor < 0.0) floor = 10.0 * cfg.tolerance * u.values.cwiseAbs().maxCoeff();
    try {
      DecayFit fit = fit_decay(profile, floor);
      ordered_json jf;
      jf["check"] = "oscillation_alpha";
      jf["R"] = vc.osc_R0;
      jf["ratio"] = json_number(fit.alpha);
      jf["fit_residual"] = json_number(fit.residual);
      recs.push_back(jf);
    } catch (const InsufficientDataError&) {
    }
  }
  j["records"] = recs;
  write_text_atomic(cfg.out_dir + "/report.json", j.dump(2) + "\n");
  std::cout << "verify: classification " << to_string(cls) << ", " << recs.size()
            << " check records, outputs in " << cfg.out_dir << "\n";
  return 0;
}

int cmd_sweep(const RunConfig& cfg) {
  SweepSpec spec = cfg.make_sweep_spec();
  VerificationReport report = sweep(spec);
  write_text_atomic(cfg.out_dir + "/sweep.json", report_to_json(report).dump(2) + "\n");
  for (const auto& s : report.summaries)
    std::cout << s.check << " @" << s.resolution << ": max " << s.max_ratio << " (instance "
              << s.max_instance << "), min " << s.min_ratio << ", median " << s.median_ratio
              << ", n=" << s.count << "\n";
  if (report.failed_instances > 0)
    std::cerr << report.failed_instances << " instance runs failed\n";
  for (const auto& a : report.alarms)
    std::cerr << "DIVERGENCE ALARM: " << a.check << " " << a.statistic
              << " drifts by " << a.worst_step_drift * 100.0 << "% per refinement\n";
  std::cout << "sweep report: " << cfg.out_dir << "/sweep.json\n";
  return report.alarms.empty() ? 0 : 1;
}

int cmd_oracle(const RunConfig& cfg) {
  std::vector<int> res = cfg.resolutions.empty() ? std::vector<int>{16, 32, 64} : cfg.resolutions;
  auto results = run_oracles(res);
  ordered_json j;
  j["schema"] = 1;
  j["command"] = "oracle";
  ordered_json arr = ordered_json::array();
  bool all_pass = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  " << r.detail << "\n";
    ordered_json jr;
    jr["name"] = r.name;
    jr["pass"] = r.pass;
    jr["metric"] = json_number(r.metric);
    jr["detail"] = r.detail;
    arr.push_back(jr);
    all_pass = all_pass && r.pass;
  }
  j["oracles"] = arr;
  write_text_atomic(cfg.out_dir + "/oracle.json", j.dump(2) + "\n");
  return all_pass ? 0 : 1;
}

int cmd_schedule(const RunConfig& cfg) {
  auto rows = moser_schedule(cfg.sched_n, cfg.sched_gamma, cfg.sched_k_max);
  const double chi = sobolev_chi(cfg.sched_n, cfg.sched_gamma);
  std::cout << "n = " << cfg.sched_n << ", gamma = " << cfg.sched_gamma << ", chi = " << chi
            << ", geometric sum = " << cfg.sched_n / cfg.sched_gamma << "\n";
  std::cout << "k\tbeta_k\texponent_k\tr_k\n";
  for (const auto& row : rows)
    std::cout << row.k << "\t" << format_double(row.beta) << "\t" << format_double(row.exponent)
              << "\t" << format_double(row.radius) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anisotropic gamma-homogeneous operators: solve, classify, verify"};
  app.require_subcommand(1);

  CliArgs args;
  for (const char* name : {"solve", "classify", "verify", "sweep", "oracle", "schedule"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", args.config_path, "config file (key = value sections)");
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--seed", args.seed, "seed override");
    sub->add_option("--threads", args.threads, "worker threads for sweeps");
    sub->add_option("--resolution", args.resolution, "resolution override");
    sub->callback([&args, name]() { args.command = name; });
  }
  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = load_config(args);
    prepare_out(cfg);
    if (cfg.command == "solve") return cmd_solve(cfg);
    if (cfg.command == "classify") return cmd_classify(cfg);
    if (cfg.command == "verify") return cmd_verify(cfg);
    if (cfg.command == "sweep") return cmd_sweep(cfg);
    if (cfg.command == "oracle") return cmd_oracle(cfg);
    if (cfg.command == "schedule") return cmd_schedule(cfg);
    std::cerr << "unknown command\n";
    return 2;
  } catch (const SolveError& e) {
    std::cerr << "error: " << e.what() << " (residual " << e.report.final_residual << ")\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
