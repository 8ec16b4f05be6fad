#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "aniso/types.hpp"

namespace aniso {

/// One simplex of the mesh. hat_grad.col(k) holds the (constant) gradient of
/// the hat function of local vertex k; rows beyond the grid dimension are 0.
struct Cell {
  std::array<int32_t, 4> verts{};  // local vertex order; verts[3] unused in 2D
  Eigen::Matrix<double, 3, 4> hat_grad = Eigen::Matrix<double, 3, 4>::Zero();
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  double volume = 0.0;
};

/// Conforming simplicial mesh of an axis-aligned box. Squares are split by a
/// fixed diagonal; cubes by the six-tetrahedra diagonal rule. Immutable after
/// construction.
class Grid {
 public:
  Grid(const Box& box, const std::array<int, 3>& resolution);
  Grid(const Box& box, int resolution);  // same resolution on every axis

  int dim() const { return dim_; }
  const Box& box() const { return box_; }
  const std::array<int, 3>& resolution() const { return res_; }

  Index n_vertices() const { return static_cast<Index>(vertex_pos_.size()); }
  Index n_cells() const { return static_cast<Index>(cells_.size()); }
  const VecN& vertex(Index v) const { return vertex_pos_[v]; }
  const Cell& cell(Index c) const { return cells_[c]; }
  bool on_boundary(Index v) const { return boundary_mask_[v] != 0; }
  const std::vector<Index>& free_vertices() const { return free_vertices_; }

  int verts_per_cell() const { return dim_ + 1; }
  double min_cell_width() const;

  /// Cell containing x (ties broken arbitrarily); barycentric coords out.
  Index locate(const VecN& x, VecN& bary) const;

  /// Fixed 16-point equal-weight sub-sample of the reference simplex,
  /// exact for affine integrands; used for ball-clipped integrals.
  static const std::vector<std::array<double, 4>>& cell_samples(int dim);

 private:
  void build();
  Box box_;
  std::array<int, 3> res_{};
  int dim_ = 2;
  VecN h_;  // cell widths per axis
  std::vector<VecN> vertex_pos_;
  std::vector<Cell> cells_;
  std::vector<uint8_t> boundary_mask_;
  std::vector<Index> free_vertices_;

  Index vertex_id(int i, int j, int k) const;
};

/// Piecewise-linear nodal field over a grid. Values are owned; the grid is
/// referenced and must outlive the field.
struct DiscreteField {
  const Grid* grid = nullptr;
  Field values;

  DiscreteField() = default;
  explicit DiscreteField(const Grid& g) : grid(&g), values(Field::Zero(g.n_vertices())) {}
  DiscreteField(const Grid& g, const std::function<double(const VecN&)>& f);

  double interpolate(const VecN& x) const;
};

/// Constant gradient of the linear interpolant on one simplex.
VecN cell_gradient(const DiscreteField& field, Index cell);

/// Centroid-rule integral of f over the whole box; exact for affine f.
double integrate(const Grid& grid, const std::function<double(const VecN&)>& f);

constexpr double kSup = std::numeric_limits<double>::infinity();
constexpr double kInf = -std::numeric_limits<double>::infinity();

/// Ball-restricted statistic of a nodal field:
///   p = +inf  max over in-ball vertices, edge/sphere crossings, and center
///   p = -inf  corresponding min
///   finite p  ( integral of |u|^p over the ball )^{1/p} via 16-point
///             per-cell sub-sampling
/// Throws std::domain_error when B_r(center) is not contained in the box.
double ball_stats(const DiscreteField& field, const VecN& center, double r, double p);

/// ball_stats(+inf) - ball_stats(-inf) >= 0.
double oscillation(const DiscreteField& field, const VecN& center, double r);

/// ( integral over the ball of |f|^p )^{1/p} for a generic integrand given by
/// (sample position, cell index). Shares the sub-sampling rule with ball_stats.
double ball_lp_norm(const Grid& grid, const std::function<double(const VecN&, Index)>& f,
                    const VecN& center, double r, double p);

/// Raw ball integral of f (no absolute value, no root).
double ball_integral(const Grid& grid, const std::function<double(const VecN&, Index)>& f,
                     const VecN& center, double r);

/// CSV export: one `# {json}` metadata line, then x1,...,xn,value rows.
void write_field_csv(const DiscreteField& field, const std::string& path);

}  // namespace aniso
