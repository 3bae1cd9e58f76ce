#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fmlmc {

/// A discretized field, cell-centered, flattened row-major (x fastest).
using Field = std::vector<double>;

/// Uniform periodic grid on the unit interval; cell i is centered at (i+1/2)/n.
struct Level1D {
  int n = 0;

  double cell_width() const { return 1.0 / n; }
  double cell_center(int i) const { return (i + 0.5) / n; }
};

/// Uniform periodic grid on (0,2)x(0,1) with nx = 2*ny, so cells are square.
/// Flat index k = j*nx + i.
struct Level2D {
  int nx = 0;
  int ny = 0;

  int cells() const { return nx * ny; }
  double hx() const { return 2.0 / nx; }
  double hy() const { return 1.0 / ny; }
  double cell_center_x(int i) const { return 2.0 * (i + 0.5) / nx; }
  double cell_center_y(int j) const { return (j + 0.5) / ny; }
};

/// Nested grids ordered coarse to fine, each refined by halving cell widths.
/// Cell counts grow by s=2 per level in 1D and s=4 in 2D.
class GridHierarchy {
public:
  int dim() const { return dim_; }
  int levels() const { return dim_ == 1 ? int(levels_1d_.size()) : int(levels_2d_.size()); }
  /// Index of the finest level; levels are 0 (coarsest) .. depth() (finest).
  int depth() const { return levels() - 1; }
  /// Cells-per-level growth factor between adjacent levels.
  int refinement_factor() const { return dim_ == 1 ? 2 : 4; }

  std::size_t cells(int level) const;
  /// Diagonal Gram weight of the L2 inner product: 1/n in 1D, 2/n in 2D.
  double gram_weight(int level) const;

  const Level1D& level_1d(int level) const;
  const Level2D& level_2d(int level) const;

  friend GridHierarchy build_hierarchy_1d(int finest_n, int levels);
  friend GridHierarchy build_hierarchy_2d(int finest_nx, int finest_ny, int levels);

private:
  int dim_ = 0;
  std::vector<Level1D> levels_1d_;
  std::vector<Level2D> levels_2d_;
};

/// Builds the 1D hierarchy whose finest level has finest_n cells.
/// Throws std::invalid_argument if any coarsening step would produce a
/// fractional cell count or fewer than 2 cells.
GridHierarchy build_hierarchy_1d(int finest_n, int levels);

/// 2D analogue; requires finest_nx == 2*finest_ny.
GridHierarchy build_hierarchy_2d(int finest_nx, int finest_ny, int levels);

/// Weighted inner product x' W y with W = weight * I.
double gram_dot(std::span<const double> x, std::span<const double> y, double weight);

/// Weighted squared norm ||x||^2_W.
double gram_norm_squared(std::span<const double> x, double weight);

} // namespace fmlmc
