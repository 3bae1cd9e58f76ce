#include "fmlmc/transfer.hpp"

#include <stdexcept>

namespace fmlmc {

Field prolong_1d(std::span<const double> coarse) {
  const std::size_t n = coarse.size();
  Field fine(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    fine[2 * j] = coarse[j];
    fine[2 * j + 1] = coarse[j];
  }
  return fine;
}

Field restrict_1d(std::span<const double> fine) {
  if (fine.size() % 2 != 0)
    throw std::invalid_argument("restrict_1d: field size must be even");
  const std::size_t n = fine.size() / 2;
  Field coarse(n);
  for (std::size_t j = 0; j < n; ++j) coarse[j] = fine[2 * j] + fine[2 * j + 1];
  return coarse;
}

Field shapiro_1d(std::span<const double> field) {
  const std::size_t n = field.size();
  if (n == 0) throw std::invalid_argument("shapiro_1d: empty field");
  Field out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = field[(i + n - 1) % n];
    const double right = field[(i + 1) % n];
    out[i] = 0.25 * (left + 2.0 * field[i] + right);
  }
  return out;
}

Field prolong_2d(std::span<const double> coarse, const Level2D& coarse_level) {
  const int nx = coarse_level.nx, ny = coarse_level.ny;
  if (int(coarse.size()) != nx * ny)
    throw std::invalid_argument("prolong_2d: field size does not match level");
  const int fx = 2 * nx;
  Field fine(std::size_t(4) * nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double v = coarse[std::size_t(j) * nx + i];
      const std::size_t base = std::size_t(2 * j) * fx + 2 * i;
      fine[base] = v;
      fine[base + 1] = v;
      fine[base + fx] = v;
      fine[base + fx + 1] = v;
    }
  return fine;
}

Field restrict_2d(std::span<const double> fine, const Level2D& fine_level) {
  const int nx = fine_level.nx, ny = fine_level.ny;
  if (int(fine.size()) != nx * ny)
    throw std::invalid_argument("restrict_2d: field size does not match level");
  if (nx % 2 != 0 || ny % 2 != 0)
    throw std::invalid_argument("restrict_2d: dimensions must be even");
  const int cx = nx / 2, cy = ny / 2;
  Field coarse(std::size_t(cx) * cy);
  for (int j = 0; j < cy; ++j)
    for (int i = 0; i < cx; ++i) {
      const std::size_t base = std::size_t(2 * j) * nx + 2 * i;
      coarse[std::size_t(j) * cx + i] =
          fine[base] + fine[base + 1] + fine[base + nx] + fine[base + nx + 1];
    }
  return coarse;
}

Field shapiro_2d(std::span<const double> field, const Level2D& level) {
  const int nx = level.nx, ny = level.ny;
  if (int(field.size()) != nx * ny)
    throw std::invalid_argument("shapiro_2d: field size does not match level");
  Field tmp(field.size()), out(field.size());
  for (int j = 0; j < ny; ++j) {
    const std::size_t row = std::size_t(j) * nx;
    for (int i = 0; i < nx; ++i) {
      const double left = field[row + (i + nx - 1) % nx];
      const double right = field[row + (i + 1) % nx];
      tmp[row + i] = 0.25 * (left + 2.0 * field[row + i] + right);
    }
  }
  for (int j = 0; j < ny; ++j) {
    const std::size_t row = std::size_t(j) * nx;
    const std::size_t up = std::size_t((j + 1) % ny) * nx;
    const std::size_t down = std::size_t((j + ny - 1) % ny) * nx;
    for (int i = 0; i < nx; ++i)
      out[row + i] = 0.25 * (tmp[down + i] + 2.0 * tmp[row + i] + tmp[up + i]);
  }
  return out;
}

namespace {

Field filter_on(const GridHierarchy& h, int level, std::span<const double> field) {
  return h.dim() == 1 ? shapiro_1d(field) : shapiro_2d(field, h.level_2d(level));
}

} // namespace

Field restrict_step(const GridHierarchy& h, int fine_level, std::span<const double> field,
                    FilterConfig filters) {
  if (fine_level <= 0 || fine_level > h.depth())
    throw std::invalid_argument("restrict_step: no coarser level");
  Field work;
  if (filters.pre) {
    work = filter_on(h, fine_level, field);
    field = work;
  }
  return h.dim() == 1 ? restrict_1d(field) : restrict_2d(field, h.level_2d(fine_level));
}

Field prolong_step(const GridHierarchy& h, int coarse_level, std::span<const double> field,
                   FilterConfig filters) {
  if (coarse_level < 0 || coarse_level >= h.depth())
    throw std::invalid_argument("prolong_step: no finer level");
  Field fine = h.dim() == 1 ? prolong_1d(field) : prolong_2d(field, h.level_2d(coarse_level));
  if (filters.post) fine = filter_on(h, coarse_level + 1, fine);
  return fine;
}

Field pipeline_apply(const TransferPipeline& pipeline, std::span<const double> field) {
  const GridHierarchy& h = *pipeline.hierarchy;
  const int from = pipeline.from, to = pipeline.to;
  if (from < 0 || from > h.depth() || to < 0 || to > h.depth())
    throw std::invalid_argument("pipeline_apply: level out of range");
  if (h.cells(from) != field.size())
    throw std::invalid_argument("pipeline_apply: field size does not match source level");

  Field current(field.begin(), field.end());
  for (int l = from; l > to; --l) current = restrict_step(h, l, current, pipeline.filters);
  for (int l = from; l < to; ++l) current = prolong_step(h, l, current, pipeline.filters);
  return current;
}

} // namespace fmlmc
