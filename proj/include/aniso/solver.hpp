#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "aniso/grid.hpp"
#include "aniso/norms.hpp"
#include "aniso/types.hpp"

namespace aniso {

using ScalarMap = std::function<double(const VecN&)>;
using VectorMap = std::function<VecN(const VecN&)>;

/// Dirichlet problem for the weak equation
///
///   int  < rho(x,Du)^{gamma-1} (D rho(x,.))(Du), D phi >  =  int <F, D phi> + f phi
///
/// posed on a box with piecewise-linear fields. The energy whose
/// Euler-Lagrange equation this is reads
///
///   J(u) = int (1/gamma) rho(x,Du)^gamma - F . Du - f u
///
/// (the 1/gamma normalization leaves the weak form with no stray constant).
/// F and f are sampled at cell centroids; a singular-but-integrable F is
/// supported through the map, with accuracy limited by the centroid offset in
/// cells containing the singularity.
struct Problem {
  Box box;
  std::array<int, 3> resolution{};
  double gamma = 2.0;  // any exponent in (1, inf); the verification harness
                       // additionally wants gamma < n for its theorem suite
  NormModel norm;
  double q = 0.0;  // integrability exponent for F; must satisfy q > n/(gamma-1)
  ScalarMap boundary;
  VectorMap F;  // empty means F == 0
  ScalarMap f;  // empty means f == 0

  std::shared_ptr<const Grid> grid;
  std::shared_ptr<const FluxKernel> kernel;  // norm snapshot at cell centroids
  std::vector<VecN> F_cells;                 // centroid samples, empty when F absent
  std::vector<double> f_cells;
  Field hat_scale;  // W^{1,gamma'} scale of each hat function (1.0 on the boundary)

  Problem(const Box& box, const std::array<int, 3>& resolution, double gamma, NormModel norm,
          double q, ScalarMap boundary, VectorMap F = nullptr, ScalarMap f = nullptr);
  Problem(const Box& box, int resolution, double gamma, NormModel norm, double q,
          ScalarMap boundary, VectorMap F = nullptr, ScalarMap f = nullptr);
};

/// Centroid-quadrature energy J(u).
double energy(const Problem& problem, const DiscreteField& field);

/// dJ/du_v at every vertex; boundary components are zero. Component v equals
/// the weak residual paired with the hat function of v.
Field energy_gradient(const Problem& problem, const DiscreteField& field);

/// LHS - RHS of the weak form paired with phi; phi must vanish on the boundary.
double residual_pairing(const Problem& problem, const DiscreteField& u, const DiscreteField& phi);

/// max_v |pairing with hat_v| / ||hat_v||_{W^{1,gamma'}} over free vertices.
double residual_norm(const Problem& problem, const DiscreteField& u);

struct SolveOptions {
  double tolerance = 1e-8;        // relative to the initial residual
  double tolerance_absolute = 0;  // extra absolute target; 0 disables
  long max_iterations = 50000;
  double epsilon_regularization = 0.0;  // rho_eps = sqrt(rho^2 + eps^2 |.|^2)
  bool acceleration = true;             // momentum, restarted on energy increase
  const DiscreteField* warm_start = nullptr;  // initial guess (interior values)
};

struct SolveReport {
  long iterations = 0;
  std::vector<double> energy_trace;  // accepted energies, non-increasing
  double initial_residual = 0.0;
  double final_residual = 0.0;
  long line_search_failures = 0;
  bool converged = false;
};

struct SolveError : std::runtime_error {
  DiscreteField best_field;
  SolveReport report;
  SolveError(DiscreteField field, SolveReport rep)
      : std::runtime_error("solve: not converged within iteration budget"),
        best_field(std::move(field)),
        report(std::move(rep)) {}
};

/// Minimize the convex energy over fields with the problem's boundary values.
/// Gradient descent with Armijo backtracking (c = 1e-4, factor 0.5), steps
/// seeded by a Barzilai-Borwein estimate clamped to [1e-12, 1e3], optional
/// momentum restarted whenever it stops paying off. Convergence is declared
/// on the normalized residual, not on energy stagnation.
std::pair<DiscreteField, SolveReport> solve(const Problem& problem, const SolveOptions& options = {});

enum class Classification { Solution, Subsolution, Supersolution, Neither };

/// Signs of the weak residual against every interior hat (a nonnegative test
/// basis): all <= tol gives a subsolution, all >= -tol a supersolution, both
/// a solution.
Classification classify(const Problem& problem, const DiscreteField& u, double tol);

const char* to_string(Classification c);

}  // namespace aniso
