#include "aniso/config.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "aniso/expr.hpp"
#include "aniso/strutil.hpp"

namespace aniso {

namespace {

const std::set<std::string> kCommands = {"solve", "classify", "verify",
                                         "sweep", "oracle",   "schedule"};

struct KeyError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

[[noreturn]] void bad_key(const std::string& section, const std::string& key,
                          const std::string& why) {
  throw std::invalid_argument("config [" + section + "] " + key + ": " + why);
}

std::vector<double> parse_doubles(const std::string& section, const std::string& key,
                                  const std::string& value) {
  std::vector<double> out;
  std::istringstream in(value);
  std::string tok;
  while (in >> tok) {
    try {
      out.push_back(parse_double(tok));
    } catch (const std::exception&) {
      bad_key(section, key, "expected numbers, got '" + tok + "'");
    }
  }
  return out;
}

std::vector<std::string> parse_words(const std::string& value) {
  std::vector<std::string> out;
  std::istringstream in(value);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool parse_on_off(const std::string& section, const std::string& key, const std::string& value) {
  if (value == "on") return true;
  if (value == "off") return false;
  bad_key(section, key, "expected on|off");
}

std::string join_doubles(const std::vector<double>& vals) {
  std::string out;
  for (size_t i = 0; i < vals.size(); ++i) {
    if (i) out += " ";
    out += format_double(vals[i]);
  }
  return out;
}

}  // namespace

Box RunConfig::box() const {
  Box b;
  b.lo = VecN(dim);
  b.hi = VecN(dim);
  if (box_bounds.empty()) {
    b.lo.setConstant(-1.0);
    b.hi.setConstant(1.0);
  } else {
    for (int d = 0; d < dim; ++d) {
      b.lo[d] = box_bounds[2 * d];
      b.hi[d] = box_bounds[2 * d + 1];
    }
  }
  return b;
}

Problem RunConfig::make_problem(std::optional<int> resolution_override) const {
  const int res = resolution_override.value_or(resolution);
  NormModel norm = parse_norm_spec(norm_spec, dim);
  Expr bd = Expr::parse(boundary_expr, dim);
  ScalarMap boundary = [bd](const VecN& x) { return bd(x); };
  VectorMap F;
  if (!F_exprs.empty()) {
    std::vector<Expr> comps;
    for (const auto& e : F_exprs) comps.push_back(Expr::parse(e, dim));
    const int n = dim;
    F = [comps, n](const VecN& x) {
      VecN out(n);
      for (int d = 0; d < n; ++d) out[d] = comps[d](x);
      return out;
    };
  }
  ScalarMap f;
  if (!f_expr.empty()) {
    Expr fe = Expr::parse(f_expr, dim);
    f = [fe](const VecN& x) { return fe(x); };
  }
  return Problem(box(), res, gamma, norm, q, boundary, F, f);
}

SweepSpec RunConfig::make_sweep_spec() const {
  SweepSpec spec;
  spec.name = "sweep";
  spec.dim = dim;
  spec.norm_spec = norm_spec;
  spec.gamma = gamma;
  spec.q = q;
  Box b = box();
  spec.box_half_side = 0.5 * (b.hi[0] - b.lo[0]);
  spec.resolutions = resolutions.empty() ? std::vector<int>{resolution} : resolutions;
  spec.seeds = seeds;
  spec.seed_base = seed;
  spec.boundary_family = boundary_family;
  spec.F_family = F_family;
  spec.f_family = f_family;
  spec.checks = checks;
  spec.solver_tolerance = tolerance;
  spec.solver_max_iterations = max_iterations;
  spec.threads = threads;
  spec.enabled = enabled_checks;
  return spec;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;

  auto handle = [&](const std::string& key, const std::string& value) {
    if (section == "run") {
      if (key == "command") {
        if (!kCommands.count(value)) bad_key(section, key, "unknown command '" + value + "'");
        cfg.command = value;
      } else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_long(value));
      else if (key == "threads") cfg.threads = static_cast<int>(parse_long(value));
      else if (key == "out") cfg.out_dir = value;
      else bad_key(section, key, "unknown key");
    } else if (section == "problem") {
      if (key == "dim") {
        cfg.dim = static_cast<int>(parse_long(value));
        if (cfg.dim != 2 && cfg.dim != 3) bad_key(section, key, "dimension must be 2 or 3");
      } else if (key == "box") {
        cfg.box_bounds = parse_doubles(section, key, value);
      } else if (key == "resolution") {
        cfg.resolution = static_cast<int>(parse_long(value));
        if (cfg.resolution < 2) bad_key(section, key, "resolution must be >= 2");
      } else if (key == "gamma") cfg.gamma = parse_double(value);
      else if (key == "q") cfg.q = parse_double(value);
      else if (key == "norm") cfg.norm_spec = value;
      else if (key == "boundary") cfg.boundary_expr = value;
      else if (key == "F") cfg.F_exprs = split(value, ';');
      else if (key == "f") cfg.f_expr = value;
      else if (key == "u") cfg.u_expr = value;
      else if (key == "classify_tol") cfg.classify_tol = parse_double(value);
      else bad_key(section, key, "unknown key");
    } else if (section == "solver") {
      if (key == "tolerance") cfg.tolerance = parse_double(value);
      else if (key == "max_iterations") cfg.max_iterations = parse_long(value);
      else if (key == "epsilon_regularization") cfg.epsilon_regularization = parse_double(value);
      else if (key == "acceleration") cfg.acceleration = parse_on_off(section, key, value);
      else bad_key(section, key, "unknown key");
    } else if (section == "verification") {
      if (key == "p") cfg.checks.p = parse_double(value);
      else if (key == "theta") cfg.checks.theta = parse_double(value);
      else if (key == "tau") cfg.checks.tau = parse_double(value);
      else if (key == "sup_radii") {
        cfg.checks.sup_radii.clear();
        for (const auto& pair : split(value, ';')) {
          auto nums = parse_doubles(section, key, pair);
          if (nums.size() != 2) bad_key(section, key, "each entry needs two radii r R");
          cfg.checks.sup_radii.emplace_back(nums[0], nums[1]);
        }
      } else if (key == "harnack_R") cfg.checks.harnack_R = parse_double(value);
      else if (key == "weak_harnack_R") cfg.checks.weak_harnack_R = parse_double(value);
      else if (key == "caccioppoli_R") cfg.checks.caccioppoli_R = parse_double(value);
      else if (key == "osc_R0") cfg.checks.osc_R0 = parse_double(value);
      else if (key == "osc_levels") cfg.checks.osc_levels = static_cast<int>(parse_long(value));
      else if (key == "tail_floor")
        cfg.checks.tail_floor = value == "auto" ? -1.0 : parse_double(value);
      else if (key == "centers") {
        cfg.checks.centers.clear();
        for (const auto& pt : split(value, ';')) {
          auto nums = parse_doubles(section, key, pt);
          VecN c(static_cast<Index>(nums.size()));
          for (size_t d = 0; d < nums.size(); ++d) c[static_cast<Index>(d)] = nums[d];
          cfg.checks.centers.push_back(c);
        }
      } else if (key == "checks") cfg.enabled_checks = parse_words(value);
      else if (key == "seeds") cfg.seeds = static_cast<int>(parse_long(value));
      else if (key == "resolutions") {
        cfg.resolutions.clear();
        for (double v : parse_doubles(section, key, value))
          cfg.resolutions.push_back(static_cast<int>(v));
      } else if (key == "boundary_family") cfg.boundary_family = value;
      else if (key == "F_family") cfg.F_family = value;
      else if (key == "f_family") cfg.f_family = value;
      else bad_key(section, key, "unknown key");
    } else if (section == "schedule") {
      if (key == "n") cfg.sched_n = static_cast<int>(parse_long(value));
      else if (key == "gamma") cfg.sched_gamma = parse_double(value);
      else if (key == "k_max") cfg.sched_k_max = static_cast<int>(parse_long(value));
      else bad_key(section, key, "unknown key");
    } else if (section == "derived") {
      // echoed exponents; recomputed on parse
      if (key != "gamma_prime" && key != "delta" && key != "chi")
        bad_key(section, key, "unknown key");
    } else {
      throw std::invalid_argument("config: unknown section [" + section + "]");
    }
  };

  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    if (section.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": key outside any [section]");
    handle(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }

  // cross-key constraints, named explicitly
  if (!(cfg.gamma > 1.0) || !std::isfinite(cfg.gamma))
    throw std::invalid_argument("config [problem] gamma: must exceed 1");
  const double q_floor = static_cast<double>(cfg.dim) / (cfg.gamma - 1.0);
  if (!(cfg.q > q_floor))
    throw std::invalid_argument("config [problem] q: must exceed n/(gamma-1) = " +
                                format_double(q_floor));
  if (!(cfg.checks.theta < cfg.checks.tau))
    throw std::invalid_argument("config [verification] theta: must be smaller than tau");
  if (!cfg.box_bounds.empty() && cfg.box_bounds.size() != static_cast<size_t>(2 * cfg.dim))
    throw std::invalid_argument("config [problem] box: needs lo/hi per axis (" +
                                std::to_string(2 * cfg.dim) + " numbers)");
  if (!cfg.box_bounds.empty())
    for (int d = 0; d < cfg.dim; ++d)
      if (!(cfg.box_bounds[2 * d] < cfg.box_bounds[2 * d + 1]))
        throw std::invalid_argument("config [problem] box: lo must be below hi on axis " +
                                    std::to_string(d + 1));
  cfg.checks.validate(cfg.dim, cfg.gamma, cfg.q);
  if (!kCommands.count(cfg.command))
    throw std::invalid_argument("config [run] command: unknown command");
  for (const auto& name : cfg.enabled_checks)
    if (name != "caccioppoli" && name != "sup_bound" && name != "weak_harnack" &&
        name != "harnack" && name != "oscillation")
      throw std::invalid_argument("config [verification] checks: unknown check '" + name + "'");
  // expressions and the norm spec must parse
  (void)parse_norm_spec(cfg.norm_spec, cfg.dim);
  (void)Expr::parse(cfg.boundary_expr, cfg.dim);
  if (!cfg.F_exprs.empty()) {
    if (cfg.F_exprs.size() != static_cast<size_t>(cfg.dim))
      throw std::invalid_argument("config [problem] F: needs one component per axis");
    for (const auto& e : cfg.F_exprs) (void)Expr::parse(e, cfg.dim);
  }
  if (!cfg.f_expr.empty()) (void)Expr::parse(cfg.f_expr, cfg.dim);
  if (!cfg.u_expr.empty()) (void)Expr::parse(cfg.u_expr, cfg.dim);
  return cfg;
}

std::string canonical_print(const RunConfig& c) {
  std::ostringstream out;
  out << "[run]\n";
  out << "command = " << c.command << "\n";
  out << "seed = " << c.seed << "\n";
  out << "threads = " << c.threads << "\n";
  out << "out = " << c.out_dir << "\n";
  out << "\n[problem]\n";
  out << "dim = " << c.dim << "\n";
  Box b = c.box();
  std::vector<double> bounds;
  for (int d = 0; d < c.dim; ++d) {
    bounds.push_back(b.lo[d]);
    bounds.push_back(b.hi[d]);
  }
  out << "box = " << join_doubles(bounds) << "\n";
  out << "resolution = " << c.resolution << "\n";
  out << "gamma = " << format_double(c.gamma) << "\n";
  out << "q = " << format_double(c.q) << "\n";
  out << "norm = " << c.norm_spec << "\n";
  out << "boundary = " << c.boundary_expr << "\n";
  if (!c.F_exprs.empty()) {
    out << "F = ";
    for (size_t i = 0; i < c.F_exprs.size(); ++i) out << (i ? " ; " : "") << c.F_exprs[i];
    out << "\n";
  }
  if (!c.f_expr.empty()) out << "f = " << c.f_expr << "\n";
  if (!c.u_expr.empty()) out << "u = " << c.u_expr << "\n";
  out << "classify_tol = " << format_double(c.classify_tol) << "\n";
  out << "\n[solver]\n";
  out << "tolerance = " << format_double(c.tolerance) << "\n";
  out << "max_iterations = " << c.max_iterations << "\n";
  out << "epsilon_regularization = " << format_double(c.epsilon_regularization) << "\n";
  out << "acceleration = " << (c.acceleration ? "on" : "off") << "\n";
  out << "\n[verification]\n";
  out << "p = " << format_double(c.checks.p) << "\n";
  out << "theta = " << format_double(c.checks.theta) << "\n";
  out << "tau = " << format_double(c.checks.tau) << "\n";
  out << "sup_radii = ";
  for (size_t i = 0; i < c.checks.sup_radii.size(); ++i)
    out << (i ? " ; " : "") << format_double(c.checks.sup_radii[i].first) << " "
        << format_double(c.checks.sup_radii[i].second);
  out << "\n";
  out << "harnack_R = " << format_double(c.checks.harnack_R) << "\n";
  out << "weak_harnack_R = " << format_double(c.checks.weak_harnack_R) << "\n";
  out << "caccioppoli_R = " << format_double(c.checks.caccioppoli_R) << "\n";
  out << "osc_R0 = " << format_double(c.checks.osc_R0) << "\n";
  out << "osc_levels = " << c.checks.osc_levels << "\n";
  out << "tail_floor = "
      << (c.checks.tail_floor < 0 ? std::string("auto") : format_double(c.checks.tail_floor))
      << "\n";
  if (!c.checks.centers.empty()) {
    out << "centers = ";
    for (size_t i = 0; i < c.checks.centers.size(); ++i) {
      if (i) out << " ; ";
      for (Index d = 0; d < c.checks.centers[i].size(); ++d)
        out << (d ? " " : "") << format_double(c.checks.centers[i][d]);
    }
    out << "\n";
  }
  out << "checks = ";
  for (size_t i = 0; i < c.enabled_checks.size(); ++i) out << (i ? " " : "") << c.enabled_checks[i];
  out << "\n";
  out << "seeds = " << c.seeds << "\n";
  out << "resolutions = ";
  const std::vector<int> res = c.resolutions.empty() ? std::vector<int>{c.resolution}
                                                     : c.resolutions;
  for (size_t i = 0; i < res.size(); ++i) out << (i ? " " : "") << res[i];
  out << "\n";
  out << "boundary_family = " << c.boundary_family << "\n";
  out << "F_family = " << c.F_family << "\n";
  out << "f_family = " << c.f_family << "\n";
  out << "\n[schedule]\n";
  out << "n = " << c.sched_n << "\n";
  out << "gamma = " << format_double(c.sched_gamma) << "\n";
  out << "k_max = " << c.sched_k_max << "\n";
  out << "\n[derived]\n";
  out << "gamma_prime = " << format_double(holder_conjugate(c.gamma)) << "\n";
  out << "delta = " << format_double(data_exponent(c.dim, c.gamma, c.q)) << "\n";
  if (c.gamma < c.dim) out << "chi = " << format_double(sobolev_chi(c.dim, c.gamma)) << "\n";
  return out.str();
}

}  // namespace aniso
