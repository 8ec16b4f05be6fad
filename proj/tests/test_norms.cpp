#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "aniso/norms.hpp"

using namespace aniso;

namespace {

std::mt19937_64 rng(991);

VecN random_vec(int n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  VecN v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

VecN random_nonzero(int n) {
  while (true) {
    VecN v = random_vec(n);
    if (v.norm() > 0.3) return v;
  }
}

// central finite differences of rho(x, .) in xi
VecN fd_grad(const NormModel& m, const VecN& x, const VecN& xi, double h) {
  VecN g(xi.size());
  for (Index i = 0; i < xi.size(); ++i) {
    VecN a = xi, b = xi;
    a[i] += h;
    b[i] -= h;
    g[i] = (eval(m, x, a) - eval(m, x, b)) / (2.0 * h);
  }
  return g;
}

// central finite differences of the squared norm's Hessian
MatN fd_hessian_sq(const NormModel& m, const VecN& x0, const VecN& x, double h) {
  auto f = [&](const VecN& y) {
    double r = eval(m, x0, y);
    return r * r;
  };
  const Index n = x.size();
  MatN H(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      VecN pp = x, pm = x, mp = x, mm = x;
      pp[i] += h; pp[j] += h;
      pm[i] += h; pm[j] -= h;
      mp[i] -= h; mp[j] += h;
      mm[i] -= h; mm[j] -= h;
      H(i, j) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
    }
  return H;
}

std::vector<NormModel> all_families(int n) {
  MatN S(n, n);
  S.setIdentity();
  S(0, 0) = 1.5;
  S(0, 1) = 0.3;
  S(1, 0) = 0.3;
  MatN R(n, n);
  R.setIdentity();
  const double th = M_PI / 6.0;
  R(0, 0) = std::cos(th);
  R(0, 1) = -std::sin(th);
  R(1, 0) = std::sin(th);
  R(1, 1) = std::cos(th);
  return {NormModel::weighted_euclidean(S), NormModel::ell_p(n, 4.0),
          NormModel::rotated_ell_p(R, 4.0), NormModel::variable_exponent(n, 2.5, 3.5, 2)};
}

}  // namespace

TEST_CASE("eval basics for the lp family") {
  NormModel m = NormModel::ell_p(2, 4.0);
  VecN x = VecN::Zero(2);
  VecN e1(2); e1 << 1, 0;
  VecN d(2); d << 1, 1;
  CHECK(eval(m, x, e1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(eval(m, x, d) == doctest::Approx(std::pow(2.0, 0.25)).epsilon(1e-12));
  CHECK(eval(m, x, VecN(VecN::Zero(2))) == 0.0);
}

TEST_CASE("positive 1-homogeneity of eval, 0-homogeneity of grad") {
  for (int n : {2, 3}) {
    for (const auto& m : all_families(n)) {
      for (int rep = 0; rep < 30; ++rep) {
        VecN x = random_vec(n);
        VecN xi = random_nonzero(n);
        const double r = eval(m, x, xi);
        for (double lam : {0.5, 2.0, 10.0}) {
          CHECK(eval(m, x, VecN(lam * xi)) == doctest::Approx(lam * r).epsilon(1e-10));
        }
        VecN g1 = grad(m, x, xi);
        VecN g3 = grad(m, x, VecN(3.0 * xi));
        CHECK((g1 - g3).norm() <= 1e-10 * (1.0 + g1.norm()));
      }
    }
  }
}

TEST_CASE("Euler identity grad . xi = rho at random points") {
  for (int n : {2, 3}) {
    for (const auto& m : all_families(n)) {
      for (int rep = 0; rep < 100; ++rep) {
        VecN x = random_vec(n);
        VecN xi = random_nonzero(n);
        const double lhs = grad(m, x, xi).dot(xi);
        const double rhs = eval(m, x, xi);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("grad matches central differences of eval") {
  VecN x0 = VecN::Zero(2);
  NormModel lp4 = NormModel::ell_p(2, 4.0);
  VecN e1(2); e1 << 1, 0;
  VecN g = grad(lp4, x0, e1);
  VecN gfd = fd_grad(lp4, x0, e1, 1e-6);
  CHECK((g - e1).norm() <= 1e-12);
  CHECK((g - gfd).norm() <= 1e-5);

  for (int n : {2, 3}) {
    for (const auto& m : all_families(n)) {
      for (int rep = 0; rep < 25; ++rep) {
        VecN x = random_vec(n);
        VecN xi = random_nonzero(n);
        VecN ga = grad(m, x, xi);
        VecN gf = fd_grad(m, x, xi, 1e-6 * xi.norm());
        CHECK((ga - gf).norm() <= 1e-5 * std::max(1.0, ga.norm()));
      }
    }
  }
}

TEST_CASE("flux: zero extension, homogeneity, and the gamma=3 euclidean value") {
  NormModel eu = NormModel::weighted_euclidean(MatN(MatN::Identity(2, 2)));
  VecN x0 = VecN::Zero(2);
  VecN z = VecN::Zero(2);
  CHECK(flux(eu, 2.5, x0, z).norm() == 0.0);

  VecN xi(2); xi << 2, 0;
  VecN f3 = flux(eu, 3.0, x0, xi);
  CHECK(f3[0] == doctest::Approx(4.0).epsilon(1e-13));  // |xi|^{gamma-2} xi at gamma=3
  CHECK(f3[1] == doctest::Approx(0.0).epsilon(1e-13));

  for (int n : {2, 3}) {
    for (const auto& m : all_families(n)) {
      const double gamma = 2.5;
      for (int rep = 0; rep < 20; ++rep) {
        VecN x = random_vec(n);
        VecN xi1 = random_nonzero(n);
        VecN f1 = flux(m, gamma, x, xi1);
        VecN f2 = flux(m, gamma, x, VecN(2.0 * xi1));
        const double scale = std::pow(2.0, gamma - 1.0);
        CHECK((f2 - scale * f1).norm() <= 1e-10 * (1.0 + f2.norm()));
      }
    }
  }
  CHECK_THROWS_AS(flux(eu, 1.0, x0, xi), std::invalid_argument);
}

TEST_CASE("grad undefined at the origin") {
  NormModel m = NormModel::ell_p(2, 4.0);
  CHECK_THROWS_AS(grad(m, VecN(VecN::Zero(2)), VecN(VecN::Zero(2))), std::domain_error);
}

TEST_CASE("analytic duals: unit vector, conjugate exponents, inverse weights") {
  NormModel lp4 = NormModel::ell_p(2, 4.0);
  DualNorm dual{lp4, DualMode::Analytic, 1e-10, 4096};
  VecN x0 = VecN::Zero(2);
  VecN e1(2); e1 << 1, 0;
  CHECK(dual_eval(dual, x0, e1) == doctest::Approx(1.0).epsilon(1e-13));

  NormModel d = analytic_dual(lp4);
  CHECK(d.family == NormFamily::EllP);
  CHECK(d.p == doctest::Approx(4.0 / 3.0).epsilon(1e-14));

  MatN S(2, 2);
  S << 2, 0, 0, 0.5;
  NormModel wd = analytic_dual(NormModel::weighted_euclidean(S));
  CHECK(wd.S(0, 0) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(wd.S(1, 1) == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("dual of the gradient sits on the unit dual sphere") {
  for (int n : {2, 3}) {
    for (const auto& m : all_families(n)) {
      DualNorm dual{m, DualMode::Analytic, 1e-10, 4096};
      for (int rep = 0; rep < 200; ++rep) {
        VecN x = random_vec(n);
        VecN xi = random_nonzero(n);
        const double v = dual_eval(dual, x, grad(m, x, xi));
        CHECK(std::abs(v - 1.0) <= 1e-7);
      }
    }
  }
}

TEST_CASE("numeric dual agrees with the analytic dual for lp(4)") {
  NormModel lp4 = NormModel::ell_p(2, 4.0);
  DualNorm an{lp4, DualMode::Analytic, 1e-10, 4096};
  DualNorm nu{lp4, DualMode::Numeric, 1e-10, 4096};
  VecN x0 = VecN::Zero(2);
  for (int rep = 0; rep < 100; ++rep) {
    VecN z = random_nonzero(2);
    CHECK(std::abs(dual_eval(an, x0, z) - dual_eval(nu, x0, z)) <= 1e-8);
  }
}

TEST_CASE("numeric dual identity within its advertised tolerance") {
  NormModel lp4 = NormModel::ell_p(2, 4.0);
  DualNorm nu{lp4, DualMode::Numeric, 1e-9, 4096};
  VecN x0 = VecN::Zero(2);
  for (int rep = 0; rep < 50; ++rep) {
    VecN xi = random_nonzero(2);
    const double v = dual_eval(nu, x0, grad(lp4, x0, xi));
    CHECK(std::abs(v - 1.0) <= 10.0 * 1e-9 + 1e-10);
  }
}

TEST_CASE("Fenchel inequality on random pairs, all families") {
  for (int n : {2, 3}) {
    for (const auto& m : all_families(n)) {
      DualNorm dual{m, DualMode::Analytic, 1e-10, 4096};
      for (int rep = 0; rep < 1000; ++rep) {
        VecN x = random_vec(n);
        VecN xi = random_vec(n);
        VecN z = random_vec(n);
        CHECK(xi.dot(z) <= eval(m, x, xi) * dual_eval(dual, x, z) + 1e-9);
      }
    }
  }
}

TEST_CASE("biduality: numeric dual of the analytic dual recovers eval") {
  for (const auto& m : all_families(2)) {
    DualNorm bidual{analytic_dual(m), DualMode::Numeric, 1e-9, 4096};
    for (int rep = 0; rep < 25; ++rep) {
      VecN x = random_vec(2);
      VecN xi = random_nonzero(2);
      CHECK(std::abs(dual_eval(bidual, x, xi) - eval(m, x, xi)) <= 1e-6);
    }
  }
}

TEST_CASE("triangle inequality, strict off parallel directions") {
  NormModel lp4 = NormModel::ell_p(2, 4.0);
  VecN x0 = VecN::Zero(2);
  for (int rep = 0; rep < 200; ++rep) {
    VecN a = random_nonzero(2), b = random_nonzero(2);
    const double lhs = eval(lp4, x0, VecN(a + b));
    const double rhs = eval(lp4, x0, a) + eval(lp4, x0, b);
    CHECK(lhs <= rhs + 1e-12);
    const double cosang = a.dot(b) / (a.norm() * b.norm());
    if (std::acos(std::clamp(cosang, -1.0, 1.0)) > 0.1 && cosang > -0.999)
      CHECK(rhs - lhs > 0.0);
  }
}

TEST_CASE("ellipticity window: scaled identity and lp(4)") {
  Box box = Box::centered(2, 1.0);
  MatN S2 = 2.0 * MatN::Identity(2, 2);
  auto est = ellipticity_bounds(NormModel::weighted_euclidean(S2), box, 64);
  CHECK(est.nu == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(est.lambda == doctest::Approx(2.0).epsilon(1e-10));

  auto lp = ellipticity_bounds(NormModel::ell_p(2, 4.0), box, 256);
  CHECK(lp.nu == doctest::Approx(std::pow(2.0, -0.25)).epsilon(1e-8));
  CHECK(lp.lambda == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(lp.nu <= lp.lambda);

  CHECK_THROWS_AS(ellipticity_bounds(NormModel::ell_p(2, 4.0), box, 2), std::invalid_argument);
}

TEST_CASE("dual values stay within the inverted ellipticity window") {
  for (const auto& m : all_families(2)) {
    DualNorm dual{m, DualMode::Analytic, 1e-10, 4096};
    const double nu = m.nu(), lam = m.lambda();
    for (int rep = 0; rep < 100; ++rep) {
      VecN x = random_vec(2);
      VecN d = random_nonzero(2);
      d /= d.norm();
      const double v = dual_eval(dual, x, d);
      CHECK(v >= 1.0 / lam - 1e-9);
      CHECK(v <= 1.0 / nu + 1e-9);
    }
  }
}

TEST_CASE("degenerate lp hessian: zero at basis vectors, symmetric, consistent with FD") {
  VecN e1 = VecN::Zero(2);
  e1[0] = 1.0;
  MatN H = hessian_ellp(4.0, e1);
  CHECK(H.cwiseAbs().maxCoeff() == 0.0);

  VecN e2_3 = VecN::Zero(3);
  e2_3[1] = 1.0;
  CHECK(hessian_ellp(4.0, e2_3).cwiseAbs().maxCoeff() == 0.0);

  for (int rep = 0; rep < 20; ++rep) {
    VecN x = random_nonzero(3);
    MatN H3 = hessian_ellp(4.0, x);
    CHECK((H3 - MatN(H3.transpose())).cwiseAbs().maxCoeff() <= 1e-12);
  }

  // Full Hessian of the squared norm decomposes as the degenerate part plus
  // the rank-one gradient term; finite differences see the full Hessian.
  NormModel lp4 = NormModel::ell_p(2, 4.0);
  VecN x0 = VecN::Zero(2);
  VecN x(2); x << 1, 2;
  MatN Hfd = fd_hessian_sq(lp4, x0, x, 1e-4);
  VecN gr = grad(lp4, x0, x);
  MatN full = hessian_ellp(4.0, x) + MatN(2.0 * gr * gr.transpose());
  CHECK((Hfd - full).cwiseAbs().maxCoeff() <= 1e-5);

  CHECK_THROWS_AS(hessian_ellp(4.0, VecN(VecN::Zero(2))), std::domain_error);
  CHECK_THROWS_AS(hessian_ellp(2.0, x), std::invalid_argument);
}

TEST_CASE("norm construction rejects bad parameters") {
  CHECK_THROWS_AS(NormModel::ell_p(2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(NormModel::ell_p(2, 0.5), std::invalid_argument);
  MatN bad(2, 2);
  bad << 1, 1, 0, 1;
  CHECK_THROWS_AS(NormModel::rotated_ell_p(bad, 4.0), std::invalid_argument);
  MatN notspd(2, 2);
  notspd << 1, 2, 2, 1;
  CHECK_THROWS_AS(NormModel::weighted_euclidean(notspd), std::invalid_argument);
  CHECK_THROWS_AS(NormModel::variable_exponent(2, 0.9, 3.0, 0), std::invalid_argument);
}

TEST_CASE("norm spec grammar round trip") {
  for (const char* spec : {"euclidean(1.5)", "weighted(1.5,0.25,2)", "ellp(4)",
                           "rotated_ellp(4,0.5235987755982988)", "varexp(2.5,3.5,1)"}) {
    NormModel m = parse_norm_spec(spec, 2);
    NormModel m2 = parse_norm_spec(format_norm_spec(m), 2);
    VecN x(2); x << 0.3, -0.2;
    for (int rep = 0; rep < 10; ++rep) {
      VecN xi = random_nonzero(2);
      CHECK(eval(m, x, xi) == doctest::Approx(eval(m2, x, xi)).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(parse_norm_spec("ellp(1)", 2), std::invalid_argument);
  CHECK_THROWS_AS(parse_norm_spec("frobnicate(3)", 2), std::invalid_argument);
}
