#pragma once

#include <string>
#include <vector>

#include "aniso/solver.hpp"

namespace aniso {

struct OracleResult {
  std::string name;
  bool pass = false;
  double metric = 0.0;  // headline number (residual, order, last error)
  std::string detail;
};

/// Built-in known-solution regressions:
///   linear           flat data reproduced to machine-scale residual
///   harmonic_poly    x1^2 - x2^2 at gamma = 2, L-inf order >= 1.5
///   pseudo_p         |x1|^{4/3} - |x2|^{4/3} for the gamma = p = 4 operator,
///                    interior error decreasing under refinement
///   radial           |x|^{(gamma-n)/(gamma-1)} at gamma = 1.5 on a box offset
///                    from the singular point; error compared on the far
///                    annulus only and decreasing
std::vector<OracleResult> run_oracles(const std::vector<int>& resolutions = {16, 32, 64});

/// L-inf proxy over vertices and edge midpoints.
double field_linf_error(const Problem& problem, const DiscreteField& u,
                        const std::function<double(const VecN&)>& exact);

}  // namespace aniso
