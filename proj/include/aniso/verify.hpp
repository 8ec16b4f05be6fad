#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aniso/solver.hpp"

namespace aniso {

/// Parameters shared by the interior-estimate checks. The derived exponents
/// are recomputed from (n, gamma, q): delta = 1 - n/(q(gamma-1)) must be
/// positive, and the averaged-bound exponent p must stay below
/// n(gamma-1)/(n-gamma) whenever gamma < n (no upper bound otherwise).
struct VerificationConfig {
  double p = 1.0;
  double theta = 0.4;
  double tau = 0.8;
  std::vector<std::pair<double, double>> sup_radii = {{0.1, 0.2}, {0.1, 0.4}, {0.2, 0.4}};
  double harnack_R = 0.2;
  double weak_harnack_R = 0.42;
  double caccioppoli_R = 0.35;
  double osc_R0 = 0.32;
  int osc_levels = 4;
  double tail_floor = -1.0;  // < 0: 10 * solver tolerance * sup|u|
  std::vector<VecN> centers;  // empty: box center

  void validate(int n, double gamma, double q) const;
};

double data_exponent_checked(int n, double gamma, double q);

/// || rho(x,Du) ||_{L^gamma(B_R)} over
/// [ R^{-1} ||u||_{L^gamma(B_2R)} + ||rho_*(x,F)||_{L^gamma'(B_2R)}^{1/(gamma-1)}
///   + R^{1/(gamma-1)} ||f||_{L^gamma'(B_2R)}^{1/(gamma-1)} ],
/// the gradient-control estimate for subsolutions. 0/0 counts as 0.
/// Requires 0 < R <= 10 and B_2R inside the box.
double caccioppoli_ratio(const Problem& problem, const DiscreteField& u, const VecN& center,
                         double R);

/// sup_{B_r} u+ over
/// [ (R-r)^{-n/p} ||u+||_{L^p(B_R)} + R^delta ||rho_*F||_{L^q(B_R)}^{1/(gamma-1)}
///   + R^{gamma' delta} ||f||_{L^{q/gamma'}(B_R)}^{1/(gamma-1)} ],
/// the local-boundedness estimate for subsolutions. Requires 0 < r < R < 1.
double sup_bound_ratio(const Problem& problem, const DiscreteField& u, const VecN& center,
                       double r, double R, double p);

/// [ inf_{B_{theta R}} u+ + data terms over B_R ] over
/// [ R^{-n/p} ||u+||_{L^p(B_{tau R})} ]: bounded below by a positive constant
/// for nonnegative supersolutions. Vanishing denominator returns +inf.
/// Requires B_2R inside the box and p below the admissible window.
double weak_harnack_ratio(const Problem& problem, const DiscreteField& u, const VecN& center,
                          double R, double theta, double tau, double p);

struct HarnackResult {
  double ratio = 0.0;
  bool degenerate = false;  // 0/0 convention applied (u constant zero, no data)
};

/// sup_{B_R} u over [ inf_{B_2R} u + data terms over B_3R ] for nonnegative
/// solutions. Requires B_3R inside the box.
HarnackResult harnack_ratio(const Problem& problem, const DiscreteField& u, const VecN& center,
                            double R);

/// Oscillations over the nested balls of radii R0 * 2^{-k}, k = 0..levels-1.
std::vector<std::pair<double, double>> oscillation_profile(const DiscreteField& u,
                                                           const VecN& center, double R0,
                                                           int levels);

struct DecayFit {
  double alpha = 0.0;
  double residual = 0.0;  // rms of the log-log fit
  int points_used = 0;
};

struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Least-squares slope of log(osc) against log(radius), ignoring points at or
/// below tail_floor (where measurement noise dominates). Needs three retained
/// points.
DecayFit fit_decay(const std::vector<std::pair<double, double>>& profile, double tail_floor);

struct MoserRow {
  int k = 0;
  double beta = 0.0;      // beta_k = gamma (chi^{k-1} - 1), beta_0 = 0
  double exponent = 0.0;  // beta_k + gamma
  double radius = 0.0;    // r_k = (R - r)/2^{k+1} above r, at (r, R) = (0, 1)
};

/// Iteration bookkeeping for the integrability bootstrap: chi = n/(n-gamma),
/// (beta_k + gamma) chi = beta_{k+1} + gamma holds exactly. Requires gamma < n.
std::vector<MoserRow> moser_schedule(int n, double gamma, int k_max);

struct CheckRecord {
  std::string check;
  long instance_id = -1;
  int resolution = 0;
  VecN center;
  double r = 0.0;  // inner radius / shrink where applicable (0 if unused)
  double R = 0.0;
  double lhs = 0.0;
  double rhs_without_C = 0.0;
  double ratio = 0.0;
  bool degenerate = false;
};

struct InstanceResult {
  long id = -1;
  int resolution = 0;
  bool solved = false;
  std::string classification;
  std::string error;
  double residual = 0.0;
  long iterations = 0;
  double boundary_min = 0.0, boundary_max = 0.0;
  double field_min = 0.0, field_max = 0.0;
  std::vector<CheckRecord> records;
  std::vector<std::pair<double, double>> osc_profile;
};

struct SweepSummary {
  std::string check;
  int resolution = 0;
  long count = 0;
  double max_ratio = 0.0;
  long max_instance = -1;
  double min_ratio = 0.0;
  long min_instance = -1;
  double median_ratio = 0.0;
};

struct DivergenceAlarm {
  std::string check;
  std::string statistic;  // "max" or "min"
  std::vector<int> resolutions;
  std::vector<double> values;
  double worst_step_drift = 0.0;
};

struct SweepSpec {
  std::string name = "sweep";
  int dim = 2;
  std::string norm_spec = "euclidean(1)";
  double gamma = 2.0;
  double q = 4.0;
  double box_half_side = 1.0;
  std::vector<int> resolutions = {32};
  int seeds = 10;
  std::uint64_t seed_base = 1;
  std::string boundary_family = "trig";  // trig | constant
  std::string F_family = "zero";         // zero | smooth | singular
  std::string f_family = "zero";         // zero | smooth
  VerificationConfig checks;
  double solver_tolerance = 1e-8;
  long solver_max_iterations = 50000;
  int threads = 1;
  std::vector<std::string> enabled = {"caccioppoli", "sup_bound", "weak_harnack", "harnack",
                                      "oscillation"};
};

struct VerificationReport {
  SweepSpec spec;
  std::vector<InstanceResult> instances;
  std::vector<SweepSummary> summaries;
  std::vector<DivergenceAlarm> alarms;
  long failed_instances = 0;

  const SweepSummary* find_summary(const std::string& check, int resolution) const;
};

/// Deterministic per-instance problem generation for sweeps: positive
/// trigonometric boundary data (offset dominating the oscillation so
/// minimizers stay positive), data fields per family.
Problem make_sweep_instance(const SweepSpec& spec, long instance_id, int resolution);

/// Solve, classify, and evaluate every enabled ratio on each instance and
/// resolution. Failures are recorded per instance, never thrown. Instances
/// run concurrently when spec.threads > 1; the report is a deterministic
/// merge keyed by instance id.
VerificationReport sweep(const SweepSpec& spec);

/// Flags a tracked statistic (max ratio; min for the lower-bound check)
/// drifting monotonically toward divergence by more than 10% at every
/// refinement step.
std::vector<DivergenceAlarm> divergence_alarms(const std::vector<SweepSummary>& summaries,
                                               std::vector<int> resolutions);

/// Dirichlet solves with fixed-amplitude oscillatory boundary data on growing
/// boxes [-L, L]^n, F, f = 0; reports the oscillation over the central unit
/// ball (shrunk by one cell when L = 1 so the ball keeps the required margin).
std::vector<std::pair<double, double>> liouville_experiment(const NormModel& norm, double gamma,
                                                            const std::vector<double>& box_sizes,
                                                            double boundary_amplitude,
                                                            int cells_per_unit = 16,
                                                            double solver_tolerance = 1e-8);

}  // namespace aniso
