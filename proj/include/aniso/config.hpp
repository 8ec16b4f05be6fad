#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aniso/verify.hpp"

namespace aniso {

/// Declarative run description, parsed from the key-value config format
/// (one `[section]` per line, `key = value` entries, `#` comments).
/// parse -> canonical_print -> parse is a fixed point.
struct RunConfig {
  // [run]
  std::string command = "solve";  // solve | classify | verify | sweep | oracle | schedule
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = "out";

  // [problem]
  int dim = 2;
  std::vector<double> box_bounds;  // lo1 hi1 lo2 hi2 [lo3 hi3]; empty: [-1,1]^dim
  int resolution = 32;
  double gamma = 2.0;
  double q = 4.0;
  std::string norm_spec = "euclidean(1)";
  std::string boundary_expr = "0";
  std::vector<std::string> F_exprs;  // empty: F = 0
  std::string f_expr;                // empty: f = 0
  std::string u_expr;                // classify target; empty: classify a fresh solve
  double classify_tol = 1e-8;

  // [solver]
  double tolerance = 1e-8;
  long max_iterations = 50000;
  double epsilon_regularization = 0.0;
  bool acceleration = true;

  // [verification]
  VerificationConfig checks;
  std::vector<std::string> enabled_checks = {"caccioppoli", "sup_bound", "weak_harnack",
                                             "harnack", "oscillation"};
  int seeds = 10;
  std::vector<int> resolutions;  // empty: {resolution}
  std::string boundary_family = "trig";
  std::string F_family = "zero";
  std::string f_family = "zero";

  // [schedule]
  int sched_n = 4;
  double sched_gamma = 2.0;
  int sched_k_max = 10;

  Box box() const;
  Problem make_problem(std::optional<int> resolution_override = std::nullopt) const;
  SweepSpec make_sweep_spec() const;
};

/// Throws std::invalid_argument naming the offending key and constraint.
RunConfig parse_config(const std::string& text);

/// Normalized form with fixed section and key order; includes the derived
/// exponents (gamma', delta, and chi when gamma < n) in a [derived] section
/// that the parser accepts and recomputes.
std::string canonical_print(const RunConfig& config);

}  // namespace aniso
