#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "aniso/solver.hpp"

using namespace aniso;

namespace {

VecN vec2(double a, double b) {
  VecN v(2);
  v << a, b;
  return v;
}

NormModel euclid(int n) { return NormModel::weighted_euclidean(MatN(MatN::Identity(n, n))); }

Problem laplace_2d(int res, ScalarMap boundary, VectorMap F = nullptr, ScalarMap f = nullptr) {
  return Problem(Box::centered(2, 1.0), res, 2.0, euclid(2), 4.0, std::move(boundary),
                 std::move(F), std::move(f));
}

// L-infinity proxy sampled at vertices and edge midpoints (midpoints carry
// the interpolation-error signal that vertices and centroids can miss)
double linf_error(const Problem& p, const DiscreteField& u,
                  const std::function<double(const VecN&)>& exact) {
  double worst = 0.0;
  const Grid& g = *p.grid;
  for (Index v = 0; v < g.n_vertices(); ++v)
    worst = std::max(worst, std::abs(u.values[v] - exact(g.vertex(v))));
  for (Index c = 0; c < g.n_cells(); ++c) {
    const Cell& cl = g.cell(c);
    for (int a = 0; a <= g.dim(); ++a)
      for (int b = a + 1; b <= g.dim(); ++b) {
        VecN mid = 0.5 * (g.vertex(cl.verts[a]) + g.vertex(cl.verts[b]));
        const double uh = 0.5 * (u.values[cl.verts[a]] + u.values[cl.verts[b]]);
        worst = std::max(worst, std::abs(uh - exact(mid)));
      }
  }
  return worst;
}

double interior_vertex_linf_error(const Problem& p, const DiscreteField& u,
                                  const std::function<double(const VecN&)>& exact) {
  double worst = 0.0;
  for (Index v : p.grid->free_vertices())
    worst = std::max(worst, std::abs(u.values[v] - exact(p.grid->vertex(v))));
  return worst;
}

}  // namespace

TEST_CASE("energy: zero field and constant-gradient closed form") {
  Problem p(Box::unit_square(), 8, 2.5, NormModel::ell_p(2, 3.0), 6.0,
            [](const VecN&) { return 0.0; });
  DiscreteField zero(*p.grid);
  CHECK(energy(p, zero) == doctest::Approx(0.0));

  VecN b = vec2(1.25, -0.5);
  DiscreteField lin(*p.grid, [&](const VecN& x) { return b.dot(x); });
  VecN x0 = VecN::Zero(2);
  const double expected = std::pow(eval(p.norm, x0, b), 2.5) / 2.5;  // unit volume
  CHECK(energy(p, lin) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("directional derivative of the energy equals the residual pairing") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> dist(-1, 1);
  Problem p(Box::unit_square(), 6, 2.5, NormModel::ell_p(2, 3.0), 8.0,
            [](const VecN&) { return 0.0; },
            [](const VecN& x) { VecN F(2); F << x[1], -0.3 * x[0]; return F; },
            [](const VecN& x) { return std::sin(x[0]); });
  DiscreteField u(*p.grid, [](const VecN& x) { return x[0] * x[0] - 0.5 * x[1] + 0.3; });
  DiscreteField phi(*p.grid);
  for (Index v : p.grid->free_vertices()) phi.values[v] = dist(rng);

  const double t = 1e-6;
  DiscreteField up = u, um = u;
  up.values += t * phi.values;
  um.values -= t * phi.values;
  const double fd = (energy(p, up) - energy(p, um)) / (2.0 * t);
  CHECK(fd == doctest::Approx(residual_pairing(p, u, phi)).epsilon(1e-6));
}

TEST_CASE("assembled gradient matches finite differences at every free vertex") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dist(-1, 1);
  std::vector<NormModel> norms = {euclid(2), NormModel::ell_p(2, 4.0),
                                  NormModel::variable_exponent(2, 2.5, 3.5, 2)};
  for (const auto& nm : norms) {
    for (double gamma : {1.5, 3.0}) {
      Problem p(Box::centered(2, 1.0), 8, gamma, nm, 12.0, [](const VecN&) { return 0.0; },
                [](const VecN& x) { VecN F(2); F << 0.2 * x[1], 0.1; return F; },
                [](const VecN& x) { return 0.4 * x[0]; });
      DiscreteField u(*p.grid, [](const VecN& x) { return std::sin(2 * x[0]) + x[1]; });
      for (Index v : p.grid->free_vertices()) u.values[v] += 0.05 * dist(rng);

      Field g = energy_gradient(p, u);
      const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
      const double t = 1e-6;
      for (Index v : p.grid->free_vertices()) {
        DiscreteField up = u, um = u;
        up.values[v] += t;
        um.values[v] -= t;
        const double fd = (energy(p, up) - energy(p, um)) / (2.0 * t);
        CHECK(std::abs(fd - g[v]) <= 1e-5 * scale);
      }
      for (Index v = 0; v < p.grid->n_vertices(); ++v)
        if (p.grid->on_boundary(v)) CHECK(g[v] == 0.0);
    }
  }
}

TEST_CASE("constant flux is weakly divergence-free: linear fields have zero gradient") {
  Problem p(Box::unit_square(), 10, 3.0, NormModel::ell_p(2, 4.0), 9.0,
            [](const VecN&) { return 0.0; });
  DiscreteField lin(*p.grid, [](const VecN& x) { return 2.0 * x[0] - 0.7 * x[1] + 0.1; });
  Field g = energy_gradient(p, lin);
  CHECK(g.cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("gradient scaling under u, F, f homogeneity") {
  const double gamma = 2.5, lambda = 2.0;
  const double s = std::pow(lambda, gamma - 1.0);
  auto F1 = [](const VecN& x) { VecN F(2); F << x[1], 0.2; return F; };
  auto f1 = [](const VecN& x) { return 0.3 * x[0]; };
  auto Fs = [=](const VecN& x) { VecN F(2); F << s * x[1], s * 0.2; return F; };
  auto fs = [=](const VecN& x) { return s * 0.3 * x[0]; };
  Problem p1(Box::unit_square(), 8, gamma, NormModel::ell_p(2, 3.0), 8.0,
             [](const VecN&) { return 0.0; }, F1, f1);
  Problem ps(Box::unit_square(), 8, gamma, NormModel::ell_p(2, 3.0), 8.0,
             [](const VecN&) { return 0.0; }, Fs, fs);
  DiscreteField u(*p1.grid, [](const VecN& x) { return std::cos(x[0]) * x[1]; });
  DiscreteField us(*ps.grid);
  us.values = lambda * u.values;
  Field g1 = energy_gradient(p1, u);
  Field gs = energy_gradient(ps, us);
  CHECK((gs - s * g1).cwiseAbs().maxCoeff() <= 1e-12 * s * (1.0 + g1.cwiseAbs().maxCoeff()));
}

TEST_CASE("linear boundary data is reproduced exactly") {
  VecN b = vec2(0.75, -1.25);
  for (const auto& nm : {euclid(2), NormModel::ell_p(2, 4.0)}) {
    Problem p(Box::centered(2, 1.0), 12, 3.0, nm, 9.0,
              [&](const VecN& x) { return b.dot(x) + 0.2; });
    SolveOptions opt;
    opt.tolerance = 1e-14;
    opt.tolerance_absolute = 1e-12;
    auto [u, rep] = solve(p, opt);
    CHECK(rep.converged);
    CHECK(rep.final_residual <= 1e-10);
    DiscreteField exact(*p.grid, [&](const VecN& x) { return b.dot(x) + 0.2; });
    CHECK((u.values - exact.values).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("harmonic polynomial: observed convergence order at least 1.5") {
  auto exact = [](const VecN& x) { return x[0] * x[0] - x[1] * x[1]; };
  std::vector<double> errs;
  for (int N : {16, 32, 64}) {
    Problem p = laplace_2d(N, exact);
    SolveOptions opt;
    opt.tolerance = 1e-11;
    auto [u, rep] = solve(p, opt);
    CHECK(rep.converged);
    errs.push_back(linf_error(p, u, exact));
  }
  const double order1 = std::log2(errs[0] / errs[1]);
  const double order2 = std::log2(errs[1] / errs[2]);
  CHECK(order1 >= 1.5);
  CHECK(order2 >= 1.5);
}

TEST_CASE("pseudo 4-laplacian: explicit solution, interior error decreasing") {
  const double pp = 4.0 / 3.0;  // conjugate of 4
  auto exact = [=](const VecN& x) {
    return std::pow(std::abs(x[0]), pp) - std::pow(std::abs(x[1]), pp);
  };
  std::vector<double> errs;
  for (int N : {16, 32, 64}) {
    Problem p(Box::centered(2, 1.0), N, 4.0, NormModel::ell_p(2, 4.0), 4.0, exact);
    SolveOptions opt;
    opt.tolerance = 1e-10;
    auto [u, rep] = solve(p, opt);
    CHECK(rep.converged);
    errs.push_back(interior_vertex_linf_error(p, u, exact));
  }
  CHECK(errs[1] < errs[0]);
  CHECK(errs[2] < errs[1]);
}

TEST_CASE("pairing signs classify x1^2 as a subsolution and -x1^2 as a supersolution") {
  Problem p = laplace_2d(16, [](const VecN& x) { return x[0] * x[0]; });
  DiscreteField u(*p.grid, [](const VecN& x) { return x[0] * x[0]; });
  DiscreteField hat(*p.grid);
  hat.values[p.grid->free_vertices()[p.grid->free_vertices().size() / 2]] = 1.0;
  CHECK(residual_pairing(p, u, hat) < 0.0);  // laplacian of x1^2 is positive
  CHECK(classify(p, u, 1e-8) == Classification::Subsolution);

  DiscreteField un(*p.grid, [](const VecN& x) { return -x[0] * x[0]; });
  CHECK(residual_pairing(p, un, hat) > 0.0);
  CHECK(classify(p, un, 1e-8) == Classification::Supersolution);

  DiscreteField bad_phi(*p.grid);
  bad_phi.values.setOnes();
  CHECK_THROWS_AS(residual_pairing(p, u, bad_phi), std::domain_error);
}

TEST_CASE("converged solutions classify as solutions; perturbations as neither") {
  Problem p(Box::centered(2, 1.0), 12, 2.0, NormModel::ell_p(2, 4.0), 6.0,
            [](const VecN& x) { return 2.0 + 0.5 * std::sin(2 * x[0]) * x[1]; });
  SolveOptions opt;
  opt.tolerance = 1e-10;
  auto [u, rep] = solve(p, opt);
  CHECK(rep.converged);
  CHECK(classify(p, u, 1e-6) == Classification::Solution);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-1, 1);
  for (int seed = 0; seed < 5; ++seed) {
    DiscreteField pert = u;
    for (Index v : p.grid->free_vertices()) pert.values[v] += 0.05 * dist(rng);
    CHECK(classify(p, pert, 1e-6) == Classification::Neither);
  }
}

TEST_CASE("energy is convex along field averages") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-1, 1);
  Problem p(Box::unit_square(), 8, 2.5, NormModel::ell_p(2, 3.0), 8.0,
            [](const VecN&) { return 0.0; });
  for (int rep = 0; rep < 25; ++rep) {
    DiscreteField a(*p.grid), b(*p.grid);
    for (Index v = 0; v < p.grid->n_vertices(); ++v) {
      const double bd = p.grid->on_boundary(v) ? dist(rng) : 0.0;
      a.values[v] = bd;
      b.values[v] = bd;
    }
    for (Index v : p.grid->free_vertices()) {
      a.values[v] = dist(rng);
      b.values[v] = dist(rng);
    }
    DiscreteField mid(*p.grid);
    mid.values = 0.5 * (a.values + b.values);
    CHECK(energy(p, mid) <= 0.5 * (energy(p, a) + energy(p, b)) + 1e-12);
  }
}

TEST_CASE("energy trace is non-increasing and the max principle holds") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1, 1);
  for (int inst = 0; inst < 3; ++inst) {
    const double a1 = dist(rng), a2 = dist(rng);
    auto bd = [=](const VecN& x) {
      return 2.0 + a1 * std::sin(2 * x[0]) + a2 * std::cos(x[1] + 0.3);
    };
    Problem p(Box::centered(2, 1.0), 16, 2.0, NormModel::ell_p(2, 4.0), 6.0, bd);
    auto [u, rep] = solve(p);
    CHECK(rep.converged);
    for (size_t k = 1; k < rep.energy_trace.size(); ++k)
      CHECK(rep.energy_trace[k] <= rep.energy_trace[k - 1]);

    double bmin = 1e300, bmax = -1e300;
    for (Index v = 0; v < p.grid->n_vertices(); ++v)
      if (p.grid->on_boundary(v)) {
        bmin = std::min(bmin, u.values[v]);
        bmax = std::max(bmax, u.values[v]);
      }
    CHECK(u.values.minCoeff() >= bmin - 1e-9);
    CHECK(u.values.maxCoeff() <= bmax + 1e-9);
  }
}

TEST_CASE("solution homogeneity: lambda u solves the scaled data problem") {
  const double gamma = 2.5, lambda = 3.0;
  const double s = std::pow(lambda, gamma - 1.0);
  auto F1 = [](const VecN& x) { VecN F(2); F << 0.3 * x[1], -0.1; return F; };
  auto f1 = [](const VecN& x) { return 0.2 * std::cos(x[0]); };
  auto bd = [](const VecN& x) { return 1.0 + 0.3 * x[0]; };
  Problem p1(Box::centered(2, 1.0), 12, gamma, NormModel::ell_p(2, 3.0), 8.0, bd, F1, f1);
  SolveOptions opt;
  opt.tolerance = 1e-11;
  auto [u, rep] = solve(p1, opt);
  CHECK(rep.converged);

  auto bds = [=](const VecN& x) { return lambda * (1.0 + 0.3 * x[0]); };
  auto Fs = [=](const VecN& x) { VecN F = F1(x); return VecN(s * F); };
  auto fs = [=](const VecN& x) { return s * f1(x); };
  Problem ps(Box::centered(2, 1.0), 12, gamma, NormModel::ell_p(2, 3.0), 8.0, bds, Fs, fs);
  DiscreteField us(*ps.grid);
  us.values = lambda * u.values;
  const double tol = 10.0 * s * std::max(rep.final_residual, 1e-12);
  CHECK(classify(ps, us, tol) == Classification::Solution);
}

TEST_CASE("non-convergence raises an error carrying the best field") {
  Problem p = laplace_2d(24, [](const VecN& x) { return std::sin(3 * x[0]) * x[1]; });
  SolveOptions opt;
  opt.max_iterations = 3;
  opt.tolerance = 1e-14;
  bool thrown = false;
  try {
    solve(p, opt);
  } catch (const SolveError& e) {
    thrown = true;
    CHECK(e.report.iterations == 3);
    CHECK(e.best_field.values.size() == p.grid->n_vertices());
    CHECK(!e.report.converged);
  }
  CHECK(thrown);
}
