#include "fmlmc/grid.hpp"

#include <stdexcept>
#include <string>

namespace fmlmc {

std::size_t GridHierarchy::cells(int level) const {
  return dim_ == 1 ? std::size_t(level_1d(level).n) : std::size_t(level_2d(level).cells());
}

double GridHierarchy::gram_weight(int level) const {
  return dim_ == 1 ? 1.0 / level_1d(level).n : 2.0 / level_2d(level).cells();
}

const Level1D& GridHierarchy::level_1d(int level) const {
  if (dim_ != 1 || level < 0 || level >= int(levels_1d_.size()))
    throw std::invalid_argument("grid: no such 1D level " + std::to_string(level));
  return levels_1d_[level];
}

const Level2D& GridHierarchy::level_2d(int level) const {
  if (dim_ != 2 || level < 0 || level >= int(levels_2d_.size()))
    throw std::invalid_argument("grid: no such 2D level " + std::to_string(level));
  return levels_2d_[level];
}

GridHierarchy build_hierarchy_1d(int finest_n, int levels) {
  if (levels < 1) throw std::invalid_argument("grid: hierarchy needs at least one level");
  if (finest_n < 2) throw std::invalid_argument("grid: finest level needs at least 2 cells");

  std::vector<int> sizes(levels);
  int n = finest_n;
  sizes[levels - 1] = n;
  for (int l = levels - 2; l >= 0; --l) {
    if (n % 2 != 0 || n / 2 < 2)
      throw std::invalid_argument("grid: cannot coarsen " + std::to_string(n) +
                                  " cells; counts must stay even and >= 2");
    n /= 2;
    sizes[l] = n;
  }

  GridHierarchy h;
  h.dim_ = 1;
  h.levels_1d_.reserve(levels);
  for (int s : sizes) h.levels_1d_.push_back(Level1D{s});
  return h;
}

GridHierarchy build_hierarchy_2d(int finest_nx, int finest_ny, int levels) {
  if (levels < 1) throw std::invalid_argument("grid: hierarchy needs at least one level");
  if (finest_nx != 2 * finest_ny)
    throw std::invalid_argument("grid: 2D grids require nx == 2*ny");
  if (finest_ny < 2) throw std::invalid_argument("grid: finest level needs ny >= 2");

  std::vector<Level2D> lv(levels);
  int nx = finest_nx, ny = finest_ny;
  lv[levels - 1] = Level2D{nx, ny};
  for (int l = levels - 2; l >= 0; --l) {
    if (nx % 2 != 0 || ny % 2 != 0 || nx / 2 < 2 || ny / 2 < 2)
      throw std::invalid_argument("grid: cannot coarsen " + std::to_string(nx) + "x" +
                                  std::to_string(ny) + "; counts must stay even and >= 2");
    nx /= 2;
    ny /= 2;
    lv[l] = Level2D{nx, ny};
  }

  GridHierarchy h;
  h.dim_ = 2;
  h.levels_2d_ = std::move(lv);
  return h;
}

double gram_dot(std::span<const double> x, std::span<const double> y, double weight) {
  if (x.size() != y.size()) throw std::invalid_argument("gram_dot: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return weight * acc;
}

double gram_norm_squared(std::span<const double> x, double weight) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return weight * acc;
}

} // namespace fmlmc
