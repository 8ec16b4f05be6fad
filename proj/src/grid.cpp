#include "aniso/grid.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "aniso/strutil.hpp"

namespace aniso {

Grid::Grid(const Box& box, const std::array<int, 3>& resolution) : box_(box), res_(resolution) {
  dim_ = box.dim();
  if (dim_ != 2 && dim_ != 3) throw std::invalid_argument("grid: dimension must be 2 or 3");
  for (int d = 0; d < dim_; ++d) {
    if (res_[d] < 1) throw std::invalid_argument("grid: resolution must be >= 1 per axis");
    if (!(box.hi[d] - box.lo[d] > 0.0)) throw std::invalid_argument("grid: degenerate box side");
  }
  build();
}

Grid::Grid(const Box& box, int resolution) : Grid(box, {resolution, resolution, resolution}) {}

Index Grid::vertex_id(int i, int j, int k) const {
  const int nx = res_[0] + 1, ny = res_[1] + 1;
  return static_cast<Index>(i) + nx * (static_cast<Index>(j) + ny * static_cast<Index>(k));
}

double Grid::min_cell_width() const {
  double w = h_[0];
  for (int d = 1; d < dim_; ++d) w = std::min(w, h_[d]);
  return w;
}

namespace {

// The six axis orderings of the Kuhn decomposition of a cube.
const int kPerm3[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};

void finish_cell(const std::vector<VecN>& pos, int dim, Cell& cell) {
  const VecN& v0 = pos[cell.verts[0]];
  Eigen::MatrixXd M(dim, dim);
  Eigen::Vector3d cen = Eigen::Vector3d::Zero();
  cen.head(dim) = v0;
  for (int k = 1; k <= dim; ++k) {
    M.col(k - 1) = pos[cell.verts[k]] - v0;
    cen.head(dim) += pos[cell.verts[k]];
  }
  const double det = M.determinant();
  double fact = dim == 2 ? 2.0 : 6.0;
  cell.volume = std::abs(det) / fact;
  cell.centroid = cen / (dim + 1);
  Eigen::MatrixXd Minv = M.inverse();
  cell.hat_grad.setZero();
  for (int k = 1; k <= dim; ++k) {
    cell.hat_grad.col(k).head(dim) = Minv.row(k - 1).transpose();
    cell.hat_grad.col(0).head(dim) -= Minv.row(k - 1).transpose();
  }
}

}  // namespace

void Grid::build() {
  h_ = VecN(dim_);
  for (int d = 0; d < dim_; ++d) h_[d] = (box_.hi[d] - box_.lo[d]) / res_[d];

  const int nx = res_[0], ny = res_[1], nz = dim_ == 3 ? res_[2] : 0;
  const Index n_vert = static_cast<Index>(nx + 1) * (ny + 1) * (dim_ == 3 ? nz + 1 : 1);
  vertex_pos_.reserve(n_vert);
  boundary_mask_.assign(n_vert, 0);

  for (int k = 0; k <= (dim_ == 3 ? nz : 0); ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) {
        VecN x(dim_);
        x[0] = box_.lo[0] + i * h_[0];
        x[1] = box_.lo[1] + j * h_[1];
        if (dim_ == 3) x[2] = box_.lo[2] + k * h_[2];
        bool bd = i == 0 || i == nx || j == 0 || j == ny;
        if (dim_ == 3) bd = bd || k == 0 || k == nz;
        const Index v = vertex_id(i, j, k);
        vertex_pos_.push_back(x);
        boundary_mask_[v] = bd ? 1 : 0;
        (void)v;
      }

  if (dim_ == 2) {
    cells_.reserve(static_cast<size_t>(2) * nx * ny);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const int32_t a = static_cast<int32_t>(vertex_id(i, j, 0));
        const int32_t b = static_cast<int32_t>(vertex_id(i + 1, j, 0));
        const int32_t c = static_cast<int32_t>(vertex_id(i + 1, j + 1, 0));
        const int32_t d = static_cast<int32_t>(vertex_id(i, j + 1, 0));
        Cell t1, t2;
        t1.verts = {a, b, c, -1};
        t2.verts = {a, c, d, -1};
        finish_cell(vertex_pos_, 2, t1);
        finish_cell(vertex_pos_, 2, t2);
        cells_.push_back(t1);
        cells_.push_back(t2);
      }
  } else {
    cells_.reserve(static_cast<size_t>(6) * nx * ny * nz);
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
          for (const auto& perm : kPerm3) {
            int c[3] = {i, j, k};
            Cell t;
            t.verts[0] = static_cast<int32_t>(vertex_id(c[0], c[1], c[2]));
            for (int s = 0; s < 3; ++s) {
              c[perm[s]] += 1;
              t.verts[s + 1] = static_cast<int32_t>(vertex_id(c[0], c[1], c[2]));
            }
            finish_cell(vertex_pos_, 3, t);
            cells_.push_back(t);
          }
  }

  for (Index v = 0; v < n_vertices(); ++v)
    if (!boundary_mask_[v]) free_vertices_.push_back(v);
}

Index Grid::locate(const VecN& x, VecN& bary) const {
  int idx[3] = {0, 0, 0};
  for (int d = 0; d < dim_; ++d) {
    double t = (x[d] - box_.lo[d]) / h_[d];
    idx[d] = std::clamp(static_cast<int>(std::floor(t)), 0, res_[d] - 1);
  }
  const int per_cube = dim_ == 2 ? 2 : 6;
  Index base;
  if (dim_ == 2)
    base = 2 * (static_cast<Index>(idx[1]) * res_[0] + idx[0]);
  else
    base = 6 * ((static_cast<Index>(idx[2]) * res_[1] + idx[1]) * res_[0] + idx[0]);

  Index best = base;
  double best_neg = -std::numeric_limits<double>::infinity();
  bary.resize(dim_ + 1);
  VecN lam(dim_ + 1);
  for (int s = 0; s < per_cube; ++s) {
    const Cell& cl = cells_[base + s];
    const VecN& v0 = vertex_pos_[cl.verts[0]];
    lam[0] = 1.0;
    for (int k = 1; k <= dim_; ++k) {
      double l = cl.hat_grad.col(k).head(dim_).dot(x - v0);
      lam[k] = l;
      lam[0] -= l;
    }
    const double worst = lam.minCoeff();
    if (worst > best_neg) {
      best_neg = worst;
      best = base + s;
      bary = lam;
    }
    if (worst >= -1e-13) break;
  }
  return best;
}

const std::vector<std::array<double, 4>>& Grid::cell_samples(int dim) {
  static const std::vector<std::array<double, 4>> tri = [] {
    std::vector<std::array<double, 4>> s;
    // centroids of the 16 congruent sub-triangles of a two-level refinement
    for (int i = 0; i + 0 <= 3; ++i)
      for (int j = 0; i + j <= 3; ++j) {
        double l1 = (3.0 * i + 1.0) / 12.0, l2 = (3.0 * j + 1.0) / 12.0;
        s.push_back({1.0 - l1 - l2, l1, l2, 0.0});
      }
    for (int i = 0; i + 0 <= 2; ++i)
      for (int j = 0; i + j <= 2; ++j) {
        double l1 = (3.0 * i + 2.0) / 12.0, l2 = (3.0 * j + 2.0) / 12.0;
        s.push_back({1.0 - l1 - l2, l1, l2, 0.0});
      }
    return s;
  }();
  static const std::vector<std::array<double, 4>> tet = [] {
    std::vector<std::array<double, 4>> s;
    // four symmetric orbits (a,b,b,b): each orbit averages to the centroid,
    // so the equal-weight rule stays exact for affine integrands
    for (double a : {0.700, 0.475, 0.250, 0.025}) {
      double b = (1.0 - a) / 3.0;
      for (int place = 0; place < 4; ++place) {
        std::array<double, 4> lam = {b, b, b, b};
        lam[place] = a;
        s.push_back(lam);
      }
    }
    return s;
  }();
  return dim == 2 ? tri : tet;
}

DiscreteField::DiscreteField(const Grid& g, const std::function<double(const VecN&)>& f)
    : grid(&g), values(Field::Zero(g.n_vertices())) {
  for (Index v = 0; v < g.n_vertices(); ++v) values[v] = f(g.vertex(v));
}

double DiscreteField::interpolate(const VecN& x) const {
  VecN bary;
  const Index c = grid->locate(x, bary);
  const Cell& cl = grid->cell(c);
  double val = 0.0;
  for (int k = 0; k <= grid->dim(); ++k) val += bary[k] * values[cl.verts[k]];
  return val;
}

VecN cell_gradient(const DiscreteField& field, Index cell) {
  const Grid& g = *field.grid;
  const Cell& cl = g.cell(cell);
  VecN du = VecN::Zero(g.dim());
  for (int k = 0; k <= g.dim(); ++k)
    du += field.values[cl.verts[k]] * cl.hat_grad.col(k).head(g.dim());
  return du;
}

double integrate(const Grid& grid, const std::function<double(const VecN&)>& f) {
  double acc = 0.0;
  VecN x(grid.dim());
  for (Index c = 0; c < grid.n_cells(); ++c) {
    x = grid.cell(c).centroid.head(grid.dim());
    acc += grid.cell(c).volume * f(x);
  }
  return acc;
}

namespace {

void require_ball_inside(const Grid& g, const VecN& center, double r) {
  if (!g.box().contains_ball(center, r, -1e-12))
    throw std::domain_error("ball_stats: ball not contained in the domain box");
}

}  // namespace

double ball_stats(const DiscreteField& field, const VecN& center, double r, double p) {
  const Grid& g = *field.grid;
  require_ball_inside(g, center, r);
  if (!(p == kSup || p == kInf || p > 0.0))
    throw std::invalid_argument("ball_stats: p must be positive, +inf, or -inf");

  if (p == kSup || p == kInf) {
    const double sign = p == kSup ? 1.0 : -1.0;
    double best = sign * field.interpolate(center);
    const double r2 = r * r;
    for (Index v = 0; v < g.n_vertices(); ++v) {
      if ((g.vertex(v) - center).squaredNorm() <= r2)
        best = std::max(best, sign * field.values[v]);
    }
    // interpolated values where mesh edges cross the sphere
    const int nv = g.verts_per_cell();
    for (Index c = 0; c < g.n_cells(); ++c) {
      const Cell& cl = g.cell(c);
      for (int a = 0; a < nv; ++a)
        for (int b = a + 1; b < nv; ++b) {
          const VecN& pa = g.vertex(cl.verts[a]);
          const VecN& pb = g.vertex(cl.verts[b]);
          VecN d = pb - pa, m = pa - center;
          const double A = d.squaredNorm();
          const double B = 2.0 * m.dot(d);
          const double C = m.squaredNorm() - r2;
          const double disc = B * B - 4.0 * A * C;
          if (disc < 0.0 || A == 0.0) continue;
          const double sq = std::sqrt(disc);
          for (double t : {(-B - sq) / (2.0 * A), (-B + sq) / (2.0 * A)}) {
            if (t < 0.0 || t > 1.0) continue;
            double val = field.values[cl.verts[a]] +
                         t * (field.values[cl.verts[b]] - field.values[cl.verts[a]]);
            best = std::max(best, sign * val);
          }
        }
    }
    return sign * best;
  }

  const auto& samples = Grid::cell_samples(g.dim());
  const int nv = g.verts_per_cell();
  const double r2 = r * r;
  double acc = 0.0;
  VecN pos(g.dim());
  for (Index c = 0; c < g.n_cells(); ++c) {
    const Cell& cl = g.cell(c);
    // quick reject: centroid farther than r + circumradius bound
    double reach = 0.0;
    for (int k = 0; k < nv; ++k)
      reach = std::max(reach, (g.vertex(cl.verts[k]) - VecN(cl.centroid.head(g.dim()))).norm());
    const double cd = (VecN(cl.centroid.head(g.dim())) - center).norm();
    if (cd > r + reach) continue;
    const double w = cl.volume / static_cast<double>(samples.size());
    for (const auto& lam : samples) {
      pos.setZero();
      double val = 0.0;
      for (int k = 0; k < nv; ++k) {
        pos += lam[k] * g.vertex(cl.verts[k]);
        val += lam[k] * field.values[cl.verts[k]];
      }
      if ((pos - center).squaredNorm() <= r2) acc += w * std::pow(std::abs(val), p);
    }
  }
  return std::pow(acc, 1.0 / p);
}

double oscillation(const DiscreteField& field, const VecN& center, double r) {
  const double hi = ball_stats(field, center, r, kSup);
  const double lo = ball_stats(field, center, r, kInf);
  return std::max(0.0, hi - lo);
}

double ball_integral(const Grid& g, const std::function<double(const VecN&, Index)>& f,
                     const VecN& center, double r) {
  require_ball_inside(g, center, r);
  const auto& samples = Grid::cell_samples(g.dim());
  const int nv = g.verts_per_cell();
  const double r2 = r * r;
  double acc = 0.0;
  VecN pos(g.dim());
  for (Index c = 0; c < g.n_cells(); ++c) {
    const Cell& cl = g.cell(c);
    double reach = 0.0;
    for (int k = 0; k < nv; ++k)
      reach = std::max(reach, (g.vertex(cl.verts[k]) - VecN(cl.centroid.head(g.dim()))).norm());
    const double cd = (VecN(cl.centroid.head(g.dim())) - center).norm();
    if (cd > r + reach) continue;
    const double w = cl.volume / static_cast<double>(samples.size());
    for (const auto& lam : samples) {
      pos.setZero();
      for (int k = 0; k < nv; ++k) pos += lam[k] * g.vertex(cl.verts[k]);
      if ((pos - center).squaredNorm() <= r2) acc += w * f(pos, c);
    }
  }
  return acc;
}

double ball_lp_norm(const Grid& g, const std::function<double(const VecN&, Index)>& f,
                    const VecN& center, double r, double p) {
  if (!(p > 0.0) || !std::isfinite(p))
    throw std::invalid_argument("ball_lp_norm: p must be finite and positive");
  double acc = ball_integral(
      g, [&](const VecN& x, Index c) { return std::pow(std::abs(f(x, c)), p); }, center, r);
  return std::pow(acc, 1.0 / p);
}

void write_field_csv(const DiscreteField& field, const std::string& path) {
  const Grid& g = *field.grid;
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("write_field_csv: cannot open " + tmp);
    out << "# {\"dim\":" << g.dim() << ",\"box_lo\":[";
    for (int d = 0; d < g.dim(); ++d) out << (d ? "," : "") << format_double(g.box().lo[d]);
    out << "],\"box_hi\":[";
    for (int d = 0; d < g.dim(); ++d) out << (d ? "," : "") << format_double(g.box().hi[d]);
    out << "],\"resolution\":[";
    for (int d = 0; d < g.dim(); ++d) out << (d ? "," : "") << g.resolution()[d];
    out << "]}\n";
    for (int d = 0; d < g.dim(); ++d) out << "x" << d + 1 << ",";
    out << "value\n";
    for (Index v = 0; v < g.n_vertices(); ++v) {
      for (int d = 0; d < g.dim(); ++d) out << format_double(g.vertex(v)[d]) << ",";
      out << format_double(field.values[v]) << "\n";
    }
  }
  std::rename(tmp.c_str(), path.c_str());
}

}  // namespace aniso
