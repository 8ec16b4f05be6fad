#include "aniso/norms.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "aniso/strutil.hpp"

namespace aniso {

namespace {

// |t|^e with fast paths for the exponents that dominate the flux loops.
inline double pow_abs(double t, double e) {
  t = std::abs(t);
  if (e == 2.0) return t * t;
  if (e == 3.0) return t * t * t;
  if (e == 4.0) { const double s = t * t; return s * s; }
  if (e == 1.0) return t;
  if (e == 0.5) return std::sqrt(t);
  if (t == 0.0) return e == 0.0 ? 1.0 : 0.0;
  return std::pow(t, e);
}

inline double lp_norm(const VecN& xi, double p) {
  if (p == 2.0) return xi.norm();
  double s = 0.0;
  for (Index i = 0; i < xi.size(); ++i) s += pow_abs(xi[i], p);
  return std::pow(s, 1.0 / p);
}

// Gradient of ||.||_p at xi != 0. Arranged as sgn(xi_i) |xi_i|^{p-1} / rho^{p-1}
// so no negative power of a vanishing coordinate is ever formed.
inline void lp_grad(const VecN& xi, double p, double rho, VecN& out) {
  const double scale = pow_abs(rho, p - 1.0);
  for (Index i = 0; i < xi.size(); ++i) {
    double m = pow_abs(xi[i], p - 1.0) / scale;
    out[i] = xi[i] < 0.0 ? -m : m;
  }
}

MatN rotation_2d(double theta) {
  MatN R(2, 2);
  const double c = std::cos(theta), s = std::sin(theta);
  R << c, -s, s, c;
  return R;
}

// In-plane rotation of the first two axes by a bounded x-dependent angle;
// identity in the remaining axis for n = 3.
MatN planar_rotation(int dim, double theta) {
  MatN R = MatN::Identity(dim, dim);
  const double c = std::cos(theta), s = std::sin(theta);
  R(0, 0) = c;
  R(0, 1) = -s;
  R(1, 0) = s;
  R(1, 1) = c;
  return R;
}

void check_orthogonal(const MatN& A) {
  MatN err = A.transpose() * A - MatN::Identity(A.rows(), A.cols());
  if (err.cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("norm model: rotation matrix is not orthogonal");
}

std::function<double(const VecN&)> exponent_profile(int profile, double mid, double half) {
  switch (profile) {
    case 0:
      return [=](const VecN& x) { return mid + half * std::sin(x[0] + x[1]); };
    case 1:
      return [=](const VecN& x) { return mid + half * std::cos(2.0 * x[0]) * std::cos(x[1]); };
    case 2:
      return [=](const VecN& x) { return mid + half * std::sin(x[0]) * std::sin(x[1]); };
    default:
      throw std::invalid_argument("variable_exponent: unknown profile id");
  }
}

std::function<MatN(const VecN&)> rotation_profile(int profile, int dim) {
  if (profile == 2)
    return [dim](const VecN& x) {
      return planar_rotation(dim, 0.4 * std::cos(x[0] - x[1]));
    };
  return [dim](const VecN&) { return MatN(MatN::Identity(dim, dim)); };
}

// Extrema of ||xi||_p on the Euclidean unit sphere in R^n.
void lp_sphere_window(int n, double p, double& lo, double& hi) {
  const double corner = std::pow(static_cast<double>(n), 1.0 / p - 0.5);
  lo = std::min(1.0, corner);
  hi = std::max(1.0, corner);
}

}  // namespace

double NormModel::nu() const {
  switch (family) {
    case NormFamily::WeightedEuclidean:
      return s_min;
    case NormFamily::EllP:
    case NormFamily::RotatedEllP: {
      double lo, hi;
      lp_sphere_window(dim, p, lo, hi);
      return lo;
    }
    case NormFamily::VariableExponent: {
      double lo0, hi0, lo1, hi1;
      lp_sphere_window(dim, p_min, lo0, hi0);
      lp_sphere_window(dim, p_max, lo1, hi1);
      return std::min(lo0, lo1);
    }
  }
  return 0.0;
}

double NormModel::lambda() const {
  switch (family) {
    case NormFamily::WeightedEuclidean:
      return s_max;
    case NormFamily::EllP:
    case NormFamily::RotatedEllP: {
      double lo, hi;
      lp_sphere_window(dim, p, lo, hi);
      return hi;
    }
    case NormFamily::VariableExponent: {
      double lo0, hi0, lo1, hi1;
      lp_sphere_window(dim, p_min, lo0, hi0);
      lp_sphere_window(dim, p_max, lo1, hi1);
      return std::max(hi0, hi1);
    }
  }
  return 0.0;
}

NormModel NormModel::weighted_euclidean(const MatN& S) {
  if (S.rows() != S.cols() || S.rows() < 2)
    throw std::invalid_argument("weighted_euclidean: S must be square, n >= 2");
  if ((S - MatN(S.transpose())).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("weighted_euclidean: S must be symmetric");
  Eigen::MatrixXd Sd = S;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Sd);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) throw std::invalid_argument("weighted_euclidean: S must be positive definite");
  NormModel m;
  m.family = NormFamily::WeightedEuclidean;
  m.dim = static_cast<int>(S.rows());
  m.S = S;
  m.s_min = lo;
  m.s_max = hi;
  return m;
}

NormModel NormModel::weighted_euclidean_map(int dim, std::function<MatN(const VecN&)> S_of_x,
                                            double s_min, double s_max) {
  if (!(s_min > 0.0 && s_max >= s_min))
    throw std::invalid_argument("weighted_euclidean_map: need 0 < s_min <= s_max");
  NormModel m;
  m.family = NormFamily::WeightedEuclidean;
  m.dim = dim;
  m.S_map = std::move(S_of_x);
  m.s_min = s_min;
  m.s_max = s_max;
  return m;
}

NormModel NormModel::ell_p(int dim, double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("ell_p: requires p in (1, inf)");
  if (dim < 2) throw std::invalid_argument("ell_p: dimension must be >= 2");
  NormModel m;
  m.family = NormFamily::EllP;
  m.dim = dim;
  m.p = p;
  return m;
}

NormModel NormModel::rotated_ell_p(const MatN& A, double p) {
  if (!(p > 1.0) || !std::isfinite(p))
    throw std::invalid_argument("rotated_ell_p: requires p in (1, inf)");
  check_orthogonal(A);
  NormModel m;
  m.family = NormFamily::RotatedEllP;
  m.dim = static_cast<int>(A.rows());
  m.p = p;
  m.A = A;
  return m;
}

NormModel NormModel::variable_exponent(int dim, double p_min, double p_max, int profile) {
  if (!(p_min > 1.0 && p_max >= p_min) || !std::isfinite(p_max))
    throw std::invalid_argument("variable_exponent: need 1 < p_min <= p_max < inf");
  if (dim < 2) throw std::invalid_argument("variable_exponent: dimension must be >= 2");
  NormModel m;
  m.family = NormFamily::VariableExponent;
  m.dim = dim;
  m.p_min = p_min;
  m.p_max = p_max;
  m.profile = profile;
  const double mid = 0.5 * (p_min + p_max), half = 0.5 * (p_max - p_min);
  m.p_map = exponent_profile(profile, mid, half);
  m.A_map = rotation_profile(profile, dim);
  return m;
}

double eval(const NormModel& norm, const VecN& x, const VecN& xi) {
  if (xi.isZero(0.0)) return 0.0;
  switch (norm.family) {
    case NormFamily::WeightedEuclidean:
      return norm.S_map ? (norm.S_map(x) * xi).norm() : (norm.S * xi).norm();
    case NormFamily::EllP:
      return lp_norm(xi, norm.p);
    case NormFamily::RotatedEllP:
      return lp_norm(norm.A * xi, norm.p);
    case NormFamily::VariableExponent: {
      double px = std::clamp(norm.p_map(x), norm.p_min, norm.p_max);
      return lp_norm(norm.A_map(x) * xi, px);
    }
  }
  return 0.0;
}

VecN grad(const NormModel& norm, const VecN& x, const VecN& xi) {
  if (xi.isZero(0.0)) throw std::domain_error("grad: gradient undefined at xi = 0");
  VecN out(xi.size());
  switch (norm.family) {
    case NormFamily::WeightedEuclidean: {
      MatN S = norm.S_map ? norm.S_map(x) : norm.S;
      VecN Sxi = S * xi;
      out = S.transpose() * Sxi / Sxi.norm();
      break;
    }
    case NormFamily::EllP:
      lp_grad(xi, norm.p, lp_norm(xi, norm.p), out);
      break;
    case NormFamily::RotatedEllP: {
      VecN y = norm.A * xi;
      VecN g(y.size());
      lp_grad(y, norm.p, lp_norm(y, norm.p), g);
      out = norm.A.transpose() * g;
      break;
    }
    case NormFamily::VariableExponent: {
      double px = std::clamp(norm.p_map(x), norm.p_min, norm.p_max);
      MatN A = norm.A_map(x);
      VecN y = A * xi;
      VecN g(y.size());
      lp_grad(y, px, lp_norm(y, px), g);
      out = A.transpose() * g;
      break;
    }
  }
  return out;
}

VecN flux(const NormModel& norm, double gamma, const VecN& x, const VecN& xi) {
  if (!(gamma > 1.0)) throw std::invalid_argument("flux: requires gamma > 1");
  if (xi.isZero(0.0)) return VecN::Zero(xi.size());
  const double r = eval(norm, x, xi);
  return VecN(std::pow(r, gamma - 1.0) * grad(norm, x, xi));
}

NormModel analytic_dual(const NormModel& norm) {
  switch (norm.family) {
    case NormFamily::WeightedEuclidean: {
      if (norm.S_map) {
        auto inner = norm.S_map;
        return NormModel::weighted_euclidean_map(
            norm.dim,
            [inner](const VecN& x) {
              return MatN(Eigen::MatrixXd(inner(x)).inverse());
            },
            1.0 / norm.s_max, 1.0 / norm.s_min);
      }
      return NormModel::weighted_euclidean(MatN(Eigen::MatrixXd(norm.S).inverse()));
    }
    case NormFamily::EllP:
      return NormModel::ell_p(norm.dim, holder_conjugate(norm.p));
    case NormFamily::RotatedEllP:
      return NormModel::rotated_ell_p(norm.A, holder_conjugate(norm.p));
    case NormFamily::VariableExponent: {
      NormModel m;
      m.family = NormFamily::VariableExponent;
      m.dim = norm.dim;
      m.p_min = holder_conjugate(norm.p_max);
      m.p_max = holder_conjugate(norm.p_min);
      m.profile = norm.profile;
      auto base_p = norm.p_map;
      double lo = norm.p_min, hi = norm.p_max;
      m.p_map = [base_p, lo, hi](const VecN& x) {
        return holder_conjugate(std::clamp(base_p(x), lo, hi));
      };
      m.A_map = norm.A_map;
      return m;
    }
  }
  throw std::logic_error("analytic_dual: unhandled family");
}

namespace {

std::vector<VecN> sphere_directions(int dim, int count) {
  std::vector<VecN> dirs;
  dirs.reserve(count);
  if (dim == 2) {
    for (int k = 0; k < count; ++k) {
      double th = 2.0 * M_PI * k / count;
      VecN d(2);
      d << std::cos(th), std::sin(th);
      dirs.push_back(d);
    }
  } else {
    // Fibonacci sphere
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      double z = 1.0 - 2.0 * (k + 0.5) / count;
      double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      double th = golden * k;
      VecN d(3);
      d << r * std::cos(th), r * std::sin(th), z;
      dirs.push_back(d);
    }
  }
  return dirs;
}

// Maximize zeta . d / rho(x, d) over unit Euclidean directions d by projected
// ascent along the sphere. The feasible gauge ball is strictly convex, so the
// maximizer is unique and ascent from the best coarse sample reaches it.
double support_ascent(const NormModel& norm, const VecN& x, const VecN& zeta, VecN d,
                      double tol, int max_iter) {
  auto value = [&](const VecN& dir) { return zeta.dot(dir) / eval(norm, x, dir); };
  double best = value(d);
  const double scale = zeta.norm();
  double h = 0.5;  // arc step on the unit sphere
  int quiet = 0;   // consecutive iterations with negligible gain
  for (int it = 0; it < max_iter; ++it) {
    const double r = eval(norm, x, d);
    VecN g = (VecN(zeta) - VecN(best * grad(norm, x, d))) / r;
    VecN gt = g - g.dot(d) * d;
    const double gn = gt.norm();
    if (gn <= 1e-14 * scale) return best;
    VecN u = gt / gn;

    double gained = 0.0;
    for (int bt = 0; bt < 50; ++bt) {
      VecN cand = d + h * u;
      cand /= cand.norm();
      const double v = value(cand);
      if (v > best) {
        // extend while the step keeps paying
        VecN better = cand;
        double hv = h;
        for (int ext = 0; ext < 8; ++ext) {
          VecN cand2 = d + 2.0 * hv * u;
          cand2 /= cand2.norm();
          const double v2 = value(cand2);
          if (v2 <= value(better)) break;
          better = cand2;
          hv *= 2.0;
        }
        gained = value(better) - best;
        best = value(better);
        d = better;
        h = std::min(0.5, hv);
        break;
      }
      h *= 0.5;
    }
    if (gained <= 0.01 * tol * std::max(scale, 1e-300)) {
      if (++quiet >= 3) return best;
    } else {
      quiet = 0;
    }
    if (h < 1e-15) return best;
  }
  throw DualAscentError(best);
}

}  // namespace

double dual_eval(const DualNorm& dual, const VecN& x, const VecN& zeta) {
  if (zeta.isZero(0.0)) return 0.0;
  if (dual.mode == DualMode::Analytic) return eval(analytic_dual(dual.base), x, zeta);

  auto dirs = sphere_directions(dual.base.dim, std::max(dual.sphere_directions, 8));
  double best = -std::numeric_limits<double>::infinity();
  VecN best_d;
  for (const auto& d : dirs) {
    double v = zeta.dot(d) / eval(dual.base, x, d);
    if (v > best) {
      best = v;
      best_d = d;
    }
  }
  return support_ascent(dual.base, x, zeta, best_d, dual.numeric_tolerance, 400);
}

EllipticityEstimate ellipticity_bounds(const NormModel& norm, const Box& domain,
                                       int sphere_samples) {
  if (sphere_samples < 2 * norm.dim)
    throw std::invalid_argument("ellipticity_bounds: need sphere_samples >= 2n");
  if (!(domain.volume() > 0.0)) throw std::invalid_argument("ellipticity_bounds: empty domain");

  const int per_axis = norm.x_dependent() ? 7 : 1;
  std::vector<VecN> xs;
  if (per_axis == 1) {
    xs.push_back(VecN(0.5 * (domain.lo + domain.hi)));
  } else {
    VecN x(norm.dim);
    const int total = static_cast<int>(std::pow(per_axis, norm.dim));
    for (int k = 0; k < total; ++k) {
      int rem = k;
      for (int dmn = 0; dmn < norm.dim; ++dmn) {
        int i = rem % per_axis;
        rem /= per_axis;
        x[dmn] = domain.lo[dmn] + (i + 0.5) * (domain.hi[dmn] - domain.lo[dmn]) / per_axis;
      }
      xs.push_back(x);
    }
  }

  auto dirs = sphere_directions(norm.dim, sphere_samples);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  VecN x_lo, d_lo, x_hi, d_hi;
  for (const auto& x : xs)
    for (const auto& d : dirs) {
      double v = eval(norm, x, d);
      if (v < lo) { lo = v; x_lo = x; d_lo = d; }
      if (v > hi) { hi = v; x_hi = x; d_hi = d; }
    }

  // Local refinement on the Euclidean sphere at the extremal samples.
  auto refine = [&](VecN x, VecN d, double sign, double start) {
    double best = start;
    double step = 0.25;
    for (int it = 0; it < 200; ++it) {
      VecN g = sign * grad(norm, x, d);
      VecN gt = g - g.dot(d) * d;
      if (gt.norm() < 1e-13) break;
      bool improved = false;
      for (int bt = 0; bt < 30; ++bt) {
        VecN cand = d + step * gt;
        cand /= cand.norm();
        double v = eval(norm, x, cand);
        if (sign * v > sign * best) {
          d = cand;
          best = v;
          improved = true;
          break;
        }
        step *= 0.5;
      }
      if (!improved) break;
      step = std::min(0.5, step * 2.0);
    }
    return best;
  };
  lo = refine(x_lo, d_lo, -1.0, lo);
  hi = refine(x_hi, d_hi, +1.0, hi);

  EllipticityEstimate est;
  est.nu = lo;
  est.lambda = hi;
  est.x_samples = static_cast<long>(xs.size());
  est.sphere_samples = static_cast<long>(dirs.size());
  return est;
}

MatN hessian_ellp(double p, const VecN& x) {
  if (!(p > 2.0)) throw std::invalid_argument("hessian_ellp: requires p > 2");
  if (x.isZero(0.0)) throw std::domain_error("hessian_ellp: undefined at x = 0");
  const Index n = x.size();
  const double r = lp_norm(x, p);
  const double rp2 = pow_abs(r, p - 2.0);
  const double r2p1 = pow_abs(r, 2.0 * (p - 1.0));
  VecN s(n);  // s_i = x_i |x_i|^{p-2}
  for (Index i = 0; i < n; ++i) {
    double m = pow_abs(x[i], p - 1.0);
    s[i] = x[i] < 0.0 ? -m : m;
  }
  MatN H(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      double v = -s[i] * s[j] / r2p1;
      if (i == j) v += pow_abs(x[i], p - 2.0) / rp2;
      H(i, j) = 2.0 * (p - 1.0) * v;
    }
  return H;
}

FluxKernel::FluxKernel(const NormModel& norm, const std::vector<VecN>& points)
    : family_(norm.family), dim_(norm.dim), p_(norm.p) {
  switch (family_) {
    case NormFamily::WeightedEuclidean:
      if (norm.S_map) {
        M_at_.reserve(points.size());
        for (const auto& x : points) {
          MatN S = norm.S_map(x);
          M_at_.push_back(MatN(S.transpose() * S));
        }
      } else {
        M_ = norm.S.transpose() * norm.S;
      }
      break;
    case NormFamily::EllP:
      break;
    case NormFamily::RotatedEllP:
      A_ = norm.A;
      break;
    case NormFamily::VariableExponent:
      p_at_.reserve(points.size());
      A_at_.reserve(points.size());
      for (const auto& x : points) {
        p_at_.push_back(std::clamp(norm.p_map(x), norm.p_min, norm.p_max));
        A_at_.push_back(norm.A_map(x));
      }
      break;
  }
}

double FluxKernel::rho(Index point, const VecN& xi) const {
  switch (family_) {
    case NormFamily::WeightedEuclidean: {
      const MatN& M = M_at_.empty() ? M_ : M_at_[point];
      return std::sqrt(xi.dot(M * xi));
    }
    case NormFamily::EllP:
      return lp_norm(xi, p_);
    case NormFamily::RotatedEllP:
      return lp_norm(A_ * xi, p_);
    case NormFamily::VariableExponent:
      return lp_norm(A_at_[point] * xi, p_at_[point]);
  }
  return 0.0;
}

void FluxKernel::grad_at(Index point, const VecN& xi, double rho_val, VecN& out) const {
  switch (family_) {
    case NormFamily::WeightedEuclidean: {
      const MatN& M = M_at_.empty() ? M_ : M_at_[point];
      out = M * xi / rho_val;
      break;
    }
    case NormFamily::EllP:
      lp_grad(xi, p_, rho_val, out);
      break;
    case NormFamily::RotatedEllP: {
      VecN y = A_ * xi;
      VecN g(y.size());
      lp_grad(y, p_, rho_val, g);
      out = A_.transpose() * g;
      break;
    }
    case NormFamily::VariableExponent: {
      VecN y = A_at_[point] * xi;
      VecN g(y.size());
      lp_grad(y, p_at_[point], rho_val, g);
      out = A_at_[point].transpose() * g;
      break;
    }
  }
}

void FluxKernel::flux(Index point, double gamma, const VecN& xi, VecN& out) const {
  const double r = rho(point, xi);
  if (r == 0.0) {
    out.setZero(xi.size());
    return;
  }
  grad_at(point, xi, r, out);
  out *= pow_abs(r, gamma - 1.0);
}

double FluxKernel::rho_regularized(Index point, double eps, const VecN& xi) const {
  const double r = rho(point, xi);
  if (eps == 0.0) return r;
  return std::sqrt(r * r + eps * eps * xi.squaredNorm());
}

void FluxKernel::flux_regularized(Index point, double gamma, double eps, const VecN& xi,
                                  VecN& out) const {
  if (eps == 0.0) {
    flux(point, gamma, xi, out);
    return;
  }
  const double r = rho(point, xi);
  if (r == 0.0 && xi.isZero(0.0)) {
    out.setZero(xi.size());
    return;
  }
  const double re = std::sqrt(r * r + eps * eps * xi.squaredNorm());
  VecN g(xi.size());
  grad_at(point, xi, r, g);
  // D rho_eps = (rho D rho + eps^2 xi) / rho_eps
  out = std::pow(re, gamma - 2.0) * (r * g + eps * eps * xi);
}

namespace {

std::vector<double> parse_args(const std::string& spec, const std::string& name) {
  size_t open = spec.find('(');
  size_t close = spec.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw std::invalid_argument("norm spec '" + name + "': expected name(args)");
  std::vector<double> args;
  for (const auto& tok : split(spec.substr(open + 1, close - open - 1), ','))
    args.push_back(parse_double(tok));
  return args;
}

MatN symmetric_from_upper(int dim, const std::vector<double>& a) {
  MatN S(dim, dim);
  size_t k = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      S(i, j) = a[k];
      S(j, i) = a[k];
      ++k;
    }
  return S;
}

}  // namespace

NormModel parse_norm_spec(const std::string& raw, int dim) {
  const std::string spec = trim(raw);
  auto starts = [&](const char* w) { return spec.rfind(w, 0) == 0; };
  if (starts("euclidean")) {
    auto a = parse_args(spec, "euclidean");
    if (a.size() != 1) throw std::invalid_argument("euclidean(scale) takes one argument");
    return NormModel::weighted_euclidean(MatN(a[0] * MatN::Identity(dim, dim)));
  }
  if (starts("weighted")) {
    auto a = parse_args(spec, "weighted");
    const size_t need = static_cast<size_t>(dim * (dim + 1) / 2);
    if (a.size() != need)
      throw std::invalid_argument("weighted(...) needs the upper triangle of S (" +
                                  std::to_string(need) + " entries)");
    return NormModel::weighted_euclidean(symmetric_from_upper(dim, a));
  }
  if (starts("rotated_ellp")) {
    auto a = parse_args(spec, "rotated_ellp");
    if (dim == 2 && a.size() == 2) return NormModel::rotated_ell_p(rotation_2d(a[1]), a[0]);
    if (a.size() == static_cast<size_t>(1 + dim * dim)) {
      MatN A(dim, dim);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) A(i, j) = a[1 + i * dim + j];
      return NormModel::rotated_ell_p(A, a[0]);
    }
    throw std::invalid_argument("rotated_ellp: expected (p, theta) in 2D or (p, entries...)");
  }
  if (starts("ellp")) {
    auto a = parse_args(spec, "ellp");
    if (a.size() != 1) throw std::invalid_argument("ellp(p) takes one argument");
    return NormModel::ell_p(dim, a[0]);
  }
  if (starts("varexp")) {
    auto a = parse_args(spec, "varexp");
    if (a.size() != 3) throw std::invalid_argument("varexp(p_min, p_max, profile_id)");
    return NormModel::variable_exponent(dim, a[0], a[1], static_cast<int>(a[2]));
  }
  throw std::invalid_argument("unknown norm spec: '" + spec + "'");
}

std::string format_norm_spec(const NormModel& norm) {
  switch (norm.family) {
    case NormFamily::WeightedEuclidean: {
      if (norm.S_map) return "weighted(<map>)";
      bool scaled_identity = true;
      for (int i = 0; i < norm.dim && scaled_identity; ++i)
        for (int j = 0; j < norm.dim; ++j)
          if (std::abs(norm.S(i, j) - (i == j ? norm.S(0, 0) : 0.0)) > 0.0) {
            scaled_identity = false;
            break;
          }
      if (scaled_identity) return "euclidean(" + format_double(norm.S(0, 0)) + ")";
      std::string out = "weighted(";
      bool first = true;
      for (int i = 0; i < norm.dim; ++i)
        for (int j = i; j < norm.dim; ++j) {
          if (!first) out += ",";
          out += format_double(norm.S(i, j));
          first = false;
        }
      return out + ")";
    }
    case NormFamily::EllP:
      return "ellp(" + format_double(norm.p) + ")";
    case NormFamily::RotatedEllP: {
      if (norm.dim == 2) {
        double theta = std::atan2(norm.A(1, 0), norm.A(0, 0));
        return "rotated_ellp(" + format_double(norm.p) + "," + format_double(theta) + ")";
      }
      std::string out = "rotated_ellp(" + format_double(norm.p);
      for (int i = 0; i < norm.dim; ++i)
        for (int j = 0; j < norm.dim; ++j) out += "," + format_double(norm.A(i, j));
      return out + ")";
    }
    case NormFamily::VariableExponent:
      return "varexp(" + format_double(norm.p_min) + "," + format_double(norm.p_max) + "," +
             std::to_string(norm.profile) + ")";
  }
  return "";
}

}  // namespace aniso
