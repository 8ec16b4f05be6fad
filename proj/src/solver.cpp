#include "aniso/solver.hpp"

#include <algorithm>
#include <cmath>

namespace aniso {

namespace {

// r^gamma with fast paths for the common exponents.
inline double pow_gamma(double r, double gamma) {
  if (gamma == 2.0) return r * r;
  if (gamma == 3.0) return r * r * r;
  if (gamma == 4.0) { double s = r * r; return s * s; }
  if (gamma == 1.5) return r * std::sqrt(r);
  return std::pow(r, gamma);
}

void check_field(const Problem& p, const DiscreteField& field, const char* who) {
  if (field.grid != p.grid.get())
    throw std::invalid_argument(std::string(who) + ": field does not live on the problem's grid");
}

}  // namespace

Problem::Problem(const Box& bx, const std::array<int, 3>& res, double g, NormModel nm, double qq,
                 ScalarMap bd, VectorMap FF, ScalarMap ff)
    : box(bx), resolution(res), gamma(g), norm(std::move(nm)), q(qq),
      boundary(std::move(bd)), F(std::move(FF)), f(std::move(ff)) {
  if (!(gamma > 1.0) || !std::isfinite(gamma))
    throw std::invalid_argument("problem: gamma must lie in (1, inf)");
  const int n = box.dim();
  if (norm.dim != n) throw std::invalid_argument("problem: norm dimension mismatch");
  if (!(q > static_cast<double>(n) / (gamma - 1.0)))
    throw std::invalid_argument("problem: requires q > n/(gamma-1)");
  for (int d = 0; d < n; ++d)
    if (res[d] < 2) throw std::invalid_argument("problem: resolution must be >= 2 per axis");

  grid = std::make_shared<Grid>(box, res);
  std::vector<VecN> centroids;
  centroids.reserve(grid->n_cells());
  for (Index c = 0; c < grid->n_cells(); ++c)
    centroids.push_back(VecN(grid->cell(c).centroid.head(n)));
  kernel = std::make_shared<FluxKernel>(norm, centroids);

  if (F) {
    F_cells.reserve(centroids.size());
    for (const auto& x : centroids) F_cells.push_back(F(x));
  }
  if (f) {
    f_cells.reserve(centroids.size());
    for (const auto& x : centroids) f_cells.push_back(f(x));
  }

  // ||hat_v||_{W^{1,gamma'}} with centroid quadrature, used to normalize
  // residuals so tolerances are mesh-comparable.
  const double gp = holder_conjugate(gamma);
  hat_scale = Field::Ones(grid->n_vertices());
  Field acc = Field::Zero(grid->n_vertices());
  const double phi_c = 1.0 / (n + 1);
  for (Index c = 0; c < grid->n_cells(); ++c) {
    const Cell& cl = grid->cell(c);
    for (int k = 0; k <= n; ++k) {
      const double gnorm = cl.hat_grad.col(k).head(n).norm();
      acc[cl.verts[k]] += cl.volume * (std::pow(gnorm, gp) + std::pow(phi_c, gp));
    }
  }
  for (Index v : grid->free_vertices()) hat_scale[v] = std::pow(acc[v], 1.0 / gp);
}

Problem::Problem(const Box& bx, int res, double g, NormModel nm, double qq, ScalarMap bd,
                 VectorMap FF, ScalarMap ff)
    : Problem(bx, {res, res, res}, g, std::move(nm), qq, std::move(bd), std::move(FF),
              std::move(ff)) {}

namespace {

double energy_impl(const Problem& p, const Field& values, double eps) {
  const Grid& g = *p.grid;
  const int n = g.dim();
  const double gamma = p.gamma;
  double acc = 0.0;
  VecN du(n);
  for (Index c = 0; c < g.n_cells(); ++c) {
    const Cell& cl = g.cell(c);
    du.setZero();
    double ubar = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double uv = values[cl.verts[k]];
      du += uv * cl.hat_grad.col(k).head(n);
      ubar += uv;
    }
    ubar /= (n + 1);
    const double r = eps == 0.0 ? p.kernel->rho(c, du) : p.kernel->rho_regularized(c, eps, du);
    double cellval = pow_gamma(r, gamma) / gamma;
    if (!p.F_cells.empty()) cellval -= p.F_cells[c].dot(du);
    if (!p.f_cells.empty()) cellval -= p.f_cells[c] * ubar;
    acc += cl.volume * cellval;
  }
  return acc;
}

void gradient_impl(const Problem& p, const Field& values, double eps, Field& out) {
  const Grid& g = *p.grid;
  const int n = g.dim();
  out.setZero(g.n_vertices());
  VecN du(n), w(n);
  const double phi_c = 1.0 / (n + 1);
  for (Index c = 0; c < g.n_cells(); ++c) {
    const Cell& cl = g.cell(c);
    du.setZero();
    for (int k = 0; k <= n; ++k) du += values[cl.verts[k]] * cl.hat_grad.col(k).head(n);
    if (eps == 0.0)
      p.kernel->flux(c, p.gamma, du, w);
    else
      p.kernel->flux_regularized(c, p.gamma, eps, du, w);
    if (!p.F_cells.empty()) w -= p.F_cells[c];
    const double fterm = p.f_cells.empty() ? 0.0 : p.f_cells[c] * phi_c;
    for (int k = 0; k <= n; ++k) {
      out[cl.verts[k]] +=
          cl.volume * (w.dot(cl.hat_grad.col(k).head(n)) - fterm);
    }
  }
  for (Index v = 0; v < g.n_vertices(); ++v)
    if (g.on_boundary(v)) out[v] = 0.0;
}

double residual_from_gradient(const Problem& p, const Field& grad) {
  double worst = 0.0;
  for (Index v : p.grid->free_vertices())
    worst = std::max(worst, std::abs(grad[v]) / p.hat_scale[v]);
  return worst;
}

}  // namespace

double energy(const Problem& problem, const DiscreteField& field) {
  check_field(problem, field, "energy");
  return energy_impl(problem, field.values, 0.0);
}

Field energy_gradient(const Problem& problem, const DiscreteField& field) {
  check_field(problem, field, "energy_gradient");
  Field out;
  gradient_impl(problem, field.values, 0.0, out);
  return out;
}

double residual_pairing(const Problem& problem, const DiscreteField& u,
                        const DiscreteField& phi) {
  check_field(problem, u, "residual_pairing");
  check_field(problem, phi, "residual_pairing");
  const Grid& g = *problem.grid;
  for (Index v = 0; v < g.n_vertices(); ++v)
    if (g.on_boundary(v) && phi.values[v] != 0.0)
      throw std::domain_error("residual_pairing: test function must vanish on the boundary");

  const int n = g.dim();
  double acc = 0.0;
  VecN du(n), dphi(n), w(n);
  for (Index c = 0; c < g.n_cells(); ++c) {
    const Cell& cl = g.cell(c);
    du.setZero();
    dphi.setZero();
    double phibar = 0.0;
    for (int k = 0; k <= n; ++k) {
      du += u.values[cl.verts[k]] * cl.hat_grad.col(k).head(n);
      dphi += phi.values[cl.verts[k]] * cl.hat_grad.col(k).head(n);
      phibar += phi.values[cl.verts[k]];
    }
    phibar /= (n + 1);
    problem.kernel->flux(c, problem.gamma, du, w);
    if (!problem.F_cells.empty()) w -= problem.F_cells[c];
    double cellval = w.dot(dphi);
    if (!problem.f_cells.empty()) cellval -= problem.f_cells[c] * phibar;
    acc += cl.volume * cellval;
  }
  return acc;
}

double residual_norm(const Problem& problem, const DiscreteField& u) {
  Field gr = energy_gradient(problem, u);
  return residual_from_gradient(problem, gr);
}

std::pair<DiscreteField, SolveReport> solve(const Problem& problem, const SolveOptions& options) {
  const Grid& g = *problem.grid;
  const double eps = options.epsilon_regularization;

  DiscreteField x(g);
  double bd_sum = 0.0;
  long bd_count = 0;
  for (Index v = 0; v < g.n_vertices(); ++v) {
    if (g.on_boundary(v)) {
      const double b = problem.boundary ? problem.boundary(g.vertex(v)) : 0.0;
      if (!std::isfinite(b)) throw std::invalid_argument("solve: boundary data not finite");
      x.values[v] = b;
      bd_sum += b;
      ++bd_count;
    }
  }
  const double fill = bd_count ? bd_sum / bd_count : 0.0;
  for (Index v : g.free_vertices()) x.values[v] = fill;

  SolveReport rep;
  Field grad_y, grad_prev, y_prev, z, grad_x;

  // The relative tolerance always references the default-fill initial
  // residual so a warm start tightens nothing.
  gradient_impl(problem, x.values, eps, grad_y);
  const double fill_residual = residual_from_gradient(problem, grad_y);

  if (options.warm_start) {
    const DiscreteField& w = *options.warm_start;
    for (Index v : g.free_vertices()) x.values[v] = w.interpolate(g.vertex(v));
    gradient_impl(problem, x.values, eps, grad_y);
  }

  Field y = x.values;
  Field x_prev = x.values;
  double Jx = energy_impl(problem, x.values, eps);
  rep.energy_trace.push_back(Jx);

  bool y_is_x = true;
  rep.initial_residual = residual_from_gradient(problem, grad_y);
  double target = options.tolerance * fill_residual;
  if (options.tolerance_absolute > 0.0) target = std::max(target, options.tolerance_absolute);

  const double armijo_c = 1e-4;
  double step = 1.0;
  double theta = 1.0;
  bool have_prev = false;
  Field z_prev;
  double Jz_prev = std::numeric_limits<double>::infinity();
  bool have_z = false;
  int stagnant = 0;  // iterations whose energy decrease drowned in roundoff

  for (long it = 0; it < options.max_iterations; ++it) {
    // cheap proxy at the gradient point; confirm at x before declaring done
    if (residual_from_gradient(problem, grad_y) <= target) {
      double resid;
      if (y_is_x) {
        resid = residual_from_gradient(problem, grad_y);
      } else {
        gradient_impl(problem, x.values, eps, grad_x);
        resid = residual_from_gradient(problem, grad_x);
      }
      if (resid <= target) {
        rep.converged = true;
        rep.final_residual = eps == 0.0 ? resid : residual_norm(problem, x);
        return {std::move(x), rep};
      }
    }
    rep.iterations = it + 1;

    // BB step estimate from consecutive gradient evaluation points
    if (have_prev) {
      double sy = 0.0, yy = 0.0;
      for (Index v : g.free_vertices()) {
        const double ds = y[v] - y_prev[v];
        const double dg = grad_y[v] - grad_prev[v];
        sy += ds * dg;
        yy += dg * dg;
      }
      if (sy > 0.0 && yy > 0.0) step = std::clamp(sy / yy, 1e-12, 1e3);
    }

    double gy_sq = grad_y.squaredNorm();
    double Jy = y_is_x ? Jx : energy_impl(problem, y, eps);
    double t = step;
    double Jz = 0.0;
    bool ok = false;
    for (int bt = 0; bt < 60; ++bt) {
      z = y - t * grad_y;
      Jz = energy_impl(problem, z, eps);
      if (Jz <= Jy - armijo_c * t * gy_sq + 1e-14 * (1.0 + std::abs(Jy))) {
        ok = true;
        break;
      }
      t *= 0.5;
    }

    if (!ok && !y_is_x) {
      // momentum point is uphill; retry the step from the monotone iterate
      theta = 1.0;
      y = x.values;
      y_is_x = true;
      gradient_impl(problem, y, eps, grad_y);
      have_prev = false;
      have_z = false;
      gy_sq = grad_y.squaredNorm();
      Jy = Jx;
      t = step;
      for (int bt = 0; bt < 60; ++bt) {
        z = y - t * grad_y;
        Jz = energy_impl(problem, z, eps);
        if (Jz <= Jx - armijo_c * t * gy_sq + 1e-14 * (1.0 + std::abs(Jx))) {
          ok = true;
          break;
        }
        t *= 0.5;
      }
    }
    if (!ok) {
      ++rep.line_search_failures;
      rep.energy_trace.push_back(Jx);
      if (rep.line_search_failures > 25) break;  // step floor reached
      theta = 1.0;
      y = x.values;
      y_is_x = true;
      gradient_impl(problem, y, eps, grad_y);
      have_prev = false;
      have_z = false;
      continue;
    }

    // monotone iterate keeps the better of candidate and incumbent; the
    // momentum sequence is fed by the candidate either way
    x_prev = x.values;
    const double decrease = Jx - Jz;
    if (Jz <= Jx) {
      x.values = z;
      Jx = Jz;
    }
    rep.energy_trace.push_back(Jx);
    stagnant = std::abs(decrease) <= 1e-13 * (1.0 + std::abs(Jx)) ? stagnant + 1 : 0;
    if (stagnant >= 5) break;  // energy differences below roundoff: polish on the residual

    const bool restart = have_z && Jz > Jz_prev;  // acceleration stopped paying off

    y_prev = y;
    grad_prev = grad_y;
    if (options.acceleration && !restart) {
      const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      y = x.values + (theta / theta_next) * (z - x.values) +
          ((theta - 1.0) / theta_next) * (x.values - x_prev);
      theta = theta_next;
      y_is_x = false;
    } else {
      theta = 1.0;
      y = x.values;
      y_is_x = true;
    }
    z_prev = z;
    Jz_prev = Jz;
    have_z = !restart;
    gradient_impl(problem, y, eps, grad_y);
    have_prev = true;
  }

  // Tail phase: the energy can no longer certify progress, so run plain BB
  // gradient steps and keep the best-residual iterate. Gradients stay
  // accurate long after energy differences drown in roundoff.
  if (rep.iterations < options.max_iterations) {
    Field w = x.values, g_w, g_old, w_old;
    gradient_impl(problem, w, eps, g_w);
    double r_best = residual_from_gradient(problem, g_w);
    double scale_cap = 1.0;
    int bad = 0;
    bool have_old = false;
    while (rep.iterations < options.max_iterations && r_best > target) {
      ++rep.iterations;
      double t = step;
      if (have_old) {
        double sy = 0.0, yy = 0.0;
        for (Index v : g.free_vertices()) {
          const double ds = w[v] - w_old[v];
          const double dg = g_w[v] - g_old[v];
          sy += ds * dg;
          yy += dg * dg;
        }
        if (sy > 0.0 && yy > 0.0) t = std::clamp(sy / yy, 1e-12, 1e3);
      }
      t *= scale_cap;
      w_old = w;
      g_old = g_w;
      w -= t * g_w;
      gradient_impl(problem, w, eps, g_w);
      have_old = true;
      const double r = residual_from_gradient(problem, g_w);
      if (r < r_best) {
        r_best = r;
        x.values = w;
        bad = 0;
      } else if (++bad > 60) {  // diverging excursion: restart from the best point
        w = x.values;
        scale_cap *= 0.5;
        have_old = false;
        bad = 0;
        if (scale_cap < 1e-8) break;
      }
      rep.energy_trace.push_back(Jx);
    }
    const double Jw = energy_impl(problem, x.values, eps);
    if (Jw <= Jx) Jx = Jw;
    if (!rep.energy_trace.empty()) rep.energy_trace.back() = Jx;
    rep.final_residual = r_best;
    if (r_best <= target) {
      rep.converged = true;
      if (eps != 0.0) rep.final_residual = residual_norm(problem, x);
      return {std::move(x), rep};
    }
  }

  rep.final_residual = residual_norm(problem, x);
  if (rep.final_residual <= target) {
    rep.converged = true;
    return {std::move(x), rep};
  }
  throw SolveError(std::move(x), std::move(rep));
}

Classification classify(const Problem& problem, const DiscreteField& u, double tol) {
  Field gr = energy_gradient(problem, u);
  bool sub = true, super = true;
  for (Index v : problem.grid->free_vertices()) {
    if (gr[v] > tol) sub = false;
    if (gr[v] < -tol) super = false;
    if (!sub && !super) break;
  }
  if (sub && super) return Classification::Solution;
  if (sub) return Classification::Subsolution;
  if (super) return Classification::Supersolution;
  return Classification::Neither;
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::Solution: return "solution";
    case Classification::Subsolution: return "subsolution";
    case Classification::Supersolution: return "supersolution";
    case Classification::Neither: return "neither";
  }
  return "?";
}

}  // namespace aniso
