#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aniso {

// Spatial dimension is 2 or 3 at runtime. Fixed max size keeps these
// stack-allocated in the per-cell loops.
using VecN = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;
using MatN = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;
using Field = Eigen::VectorXd;
using Index = Eigen::Index;

/// Axis-aligned box in R^n.
struct Box {
  VecN lo;
  VecN hi;

  int dim() const { return static_cast<int>(lo.size()); }

  double volume() const {
    double v = 1.0;
    for (int d = 0; d < dim(); ++d) v *= hi[d] - lo[d];
    return v;
  }

  bool contains(const VecN& x, double slack = 0.0) const {
    for (int d = 0; d < dim(); ++d)
      if (x[d] < lo[d] - slack || x[d] > hi[d] + slack) return false;
    return true;
  }

  /// True when the closed ball B_r(c) lies inside the box with the given margin.
  bool contains_ball(const VecN& c, double r, double margin = 0.0) const {
    for (int d = 0; d < dim(); ++d)
      if (c[d] - r < lo[d] + margin || c[d] + r > hi[d] - margin) return false;
    return true;
  }

  static Box unit_square() {
    Box b;
    b.lo = VecN::Zero(2);
    b.hi = VecN::Ones(2);
    return b;
  }

  static Box centered(int n, double half_side) {
    Box b;
    b.lo = VecN::Constant(n, -half_side);
    b.hi = VecN::Constant(n, half_side);
    return b;
  }
};

/// Holder conjugate a' with 1/a + 1/a' = 1, for a > 1.
inline double holder_conjugate(double a) {
  if (!(a > 1.0)) throw std::invalid_argument("holder_conjugate: exponent must exceed 1");
  return a / (a - 1.0);
}

/// Data-term radius exponent delta = 1 - n/(q(gamma-1)).
inline double data_exponent(int n, double gamma, double q) {
  return 1.0 - static_cast<double>(n) / (q * (gamma - 1.0));
}

/// Sobolev improvement factor chi = n/(n-gamma), defined for gamma < n.
inline double sobolev_chi(int n, double gamma) {
  if (!(gamma < n)) throw std::invalid_argument("sobolev_chi: requires gamma < n");
  return static_cast<double>(n) / (static_cast<double>(n) - gamma);
}

/// Upper bound on admissible p for the inf-side averaged bound:
/// n(gamma-1)/(n-gamma) when gamma < n, unbounded otherwise.
inline double weak_harnack_p_limit(int n, double gamma) {
  if (gamma >= n) return std::numeric_limits<double>::infinity();
  return static_cast<double>(n) * (gamma - 1.0) / (static_cast<double>(n) - gamma);
}

}  // namespace aniso
