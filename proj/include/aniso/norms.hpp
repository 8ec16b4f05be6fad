#pragma once

#include <functional>
#include <string>
#include <vector>

#include "aniso/types.hpp"

namespace aniso {

enum class NormFamily { WeightedEuclidean, EllP, RotatedEllP, VariableExponent };

/// An x-dependent direction gauge rho(x, xi): positively 1-homogeneous and
/// strictly convex in xi, with nu <= rho(x, xi) <= lambda on |xi| = 1.
///
/// Four concrete families:
///   WeightedEuclidean   rho = |S(x) xi|,  S(x) symmetric positive definite
///   EllP                rho = ||xi||_p,  p in (1, inf)
///   RotatedEllP         rho = ||A xi||_p,  A orthogonal
///   VariableExponent    rho = ||A(x) xi||_{p(x)},  p(x) in [p_min, p_max]
///
/// Instances are immutable after construction and safe to share across threads.
struct NormModel {
  NormFamily family = NormFamily::EllP;
  int dim = 2;

  double p = 2.0;  // EllP / RotatedEllP exponent
  MatN A;          // orthogonal rotation (RotatedEllP); identity otherwise
  MatN S;          // constant SPD weight (WeightedEuclidean)

  std::function<MatN(const VecN&)> S_map;  // optional x-dependent weight
  double s_min = 0.0, s_max = 0.0;         // eigenvalue window for S(x)

  double p_min = 0.0, p_max = 0.0;  // VariableExponent clamp interval
  int profile = 0;
  std::function<double(const VecN&)> p_map;
  std::function<MatN(const VecN&)> A_map;

  bool x_dependent() const {
    return (family == NormFamily::WeightedEuclidean && static_cast<bool>(S_map)) ||
           family == NormFamily::VariableExponent;
  }

  /// Analytic ellipticity window over the whole family (tight for the
  /// built-in profiles; equals the eigenvalue window for weighted norms).
  double nu() const;
  double lambda() const;

  static NormModel weighted_euclidean(const MatN& S);
  static NormModel weighted_euclidean_map(int dim, std::function<MatN(const VecN&)> S_of_x,
                                          double s_min, double s_max);
  static NormModel ell_p(int dim, double p);
  static NormModel rotated_ell_p(const MatN& A, double p);
  static NormModel variable_exponent(int dim, double p_min, double p_max, int profile);
};

/// rho(x, xi). Returns 0 exactly at xi = 0 (continuous extension).
double eval(const NormModel& norm, const VecN& x, const VecN& xi);

/// D_xi rho(x, xi) for xi != 0; 0-homogeneous, satisfies grad . xi = rho.
/// Throws std::domain_error at xi = 0.
VecN grad(const NormModel& norm, const VecN& x, const VecN& xi);

/// rho(x, xi)^{gamma-1} D_xi rho(x, xi), extended by zero at xi = 0.
/// (gamma-1)-homogeneous in xi. Requires gamma > 1.
VecN flux(const NormModel& norm, double gamma, const VecN& x, const VecN& xi);

enum class DualMode { Analytic, Numeric };

/// Convex dual rho_*(x, zeta) = sup { zeta . xi : rho(x, xi) < 1 }.
struct DualNorm {
  NormModel base;
  DualMode mode = DualMode::Analytic;
  double numeric_tolerance = 1e-10;
  int sphere_directions = 4096;  // coarse enumeration count for Numeric mode
};

/// Closed-form dual model: EllP(p) -> EllP(p'), WeightedEuclidean(S) ->
/// WeightedEuclidean(S^-1), RotatedEllP(A,p) -> RotatedEllP(A,p'),
/// VariableExponent -> pointwise conjugate exponent with the same rotation.
NormModel analytic_dual(const NormModel& norm);

double dual_eval(const DualNorm& dual, const VecN& x, const VecN& zeta);

/// Thrown when the numeric dual's ascent budget is exhausted before the
/// requested tolerance; carries the best lower bound found.
struct DualAscentError : std::runtime_error {
  double best_lower_bound;
  explicit DualAscentError(double best)
      : std::runtime_error("dual_eval: ascent budget exhausted"), best_lower_bound(best) {}
};

struct EllipticityEstimate {
  double nu = 0.0;
  double lambda = 0.0;
  long x_samples = 0;
  long sphere_samples = 0;
};

/// Sampled extrema of rho(x, xi) over x in the box and |xi| = 1, refined by
/// local descent/ascent on the Euclidean sphere. These are sample extrema,
/// not certified enclosures: true nu <= nu_est <= lambda_est <= true lambda
/// need not hold in either direction beyond the sampled set.
EllipticityEstimate ellipticity_bounds(const NormModel& norm, const Box& domain,
                                       int sphere_samples);

/// Degenerate part of the Hessian of the squared l^p norm at x, p > 2:
///
///   H_ij = 2(p-1) [ d_ij |x_i|^{p-2} / ||x||_p^{p-2}
///                   - x_i|x_i|^{p-2} x_j|x_j|^{p-2} / ||x||_p^{2(p-1)} ]
///
/// Equals 2 ||x||_p times the Hessian of the norm itself, i.e. the full
/// Hessian of ||.||_p^2 minus the rank-one term 2 (D||.||_p)(D||.||_p)^T.
/// Vanishes identically at standard basis vectors: these are the directions
/// where the operator built on ||.||_p degenerates. Throws at x = 0.
MatN hessian_ellp(double p, const VecN& x);

/// Norm snapshot at a fixed set of quadrature points. Pre-resolves the
/// x-dependence once so per-cell flux/energy loops stay allocation-free.
class FluxKernel {
 public:
  FluxKernel(const NormModel& norm, const std::vector<VecN>& points);

  double rho(Index point, const VecN& xi) const;
  /// out = rho^{gamma-1} D rho, zero at xi = 0.
  void flux(Index point, double gamma, const VecN& xi, VecN& out) const;
  /// Same for the regularized gauge rho_eps = sqrt(rho^2 + eps^2 |xi|^2).
  double rho_regularized(Index point, double eps, const VecN& xi) const;
  void flux_regularized(Index point, double gamma, double eps, const VecN& xi, VecN& out) const;

  int dim() const { return dim_; }

 private:
  NormFamily family_;
  int dim_;
  double p_ = 2.0;
  MatN A_;  // rotation (constant families)
  MatN M_;  // S^T S for the constant weighted family
  std::vector<double> p_at_;
  std::vector<MatN> A_at_;
  std::vector<MatN> M_at_;

  void grad_at(Index point, const VecN& xi, double rho_val, VecN& out) const;
  friend double kernel_rho_impl(const FluxKernel&, Index, const VecN&);
};

/// Norm specification grammar used by configs:
///   euclidean(scale) | weighted(s11,s12,s22[,...]) | ellp(p) |
///   rotated_ellp(p, theta) | rotated_ellp(p, r11,...,r33) |
///   varexp(p_min, p_max, profile_id)
NormModel parse_norm_spec(const std::string& spec, int dim);
std::string format_norm_spec(const NormModel& norm);

}  // namespace aniso
