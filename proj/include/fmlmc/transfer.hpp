#pragma once

#include <span>

#include "fmlmc/grid.hpp"

namespace fmlmc {

/// Whether grid transfers are wrapped in smoothing filters.  The pre filter
/// acts on the fine field before each restriction step; the post filter acts
/// on the fine field after each prolongation step.  Both use the same
/// second-order Shapiro stencil.
struct FilterConfig {
  bool pre = false;
  bool post = false;

  static constexpr FilterConfig unfiltered() { return {false, false}; }
  static constexpr FilterConfig filtered() { return {true, true}; }
  static constexpr FilterConfig pre_only() { return {true, false}; }
  static constexpr FilterConfig post_only() { return {false, true}; }
};

/// Piecewise-constant prolongation: each coarse cell value is copied to the
/// two fine cells it covers.  Output has 2n entries.
Field prolong_1d(std::span<const double> coarse);

/// Adjoint of prolong_1d: each coarse cell receives the sum of its two fine
/// children.  Input size must be even.
Field restrict_1d(std::span<const double> fine);

/// Periodic (1,2,1)/4 smoothing.  Defined for any n >= 1 by circulant
/// convolution (n < 3 degenerates gracefully: n=1 is the identity).
Field shapiro_1d(std::span<const double> field);

/// 2D transfers on nx*ny fields (flat index k = j*nx + i); tensor products of
/// the 1D stencils, so each coarse cell maps to a 2x2 fine block.
Field prolong_2d(std::span<const double> coarse, const Level2D& coarse_level);
Field restrict_2d(std::span<const double> fine, const Level2D& fine_level);

/// Two 1D Shapiro sweeps, along x then along y.
Field shapiro_2d(std::span<const double> field, const Level2D& level);

/// One restriction step from `fine_level` to `fine_level - 1`, applying the
/// pre filter on the fine side when enabled.
Field restrict_step(const GridHierarchy& h, int fine_level, std::span<const double> field,
                    FilterConfig filters);

/// One prolongation step from `coarse_level` to `coarse_level + 1`, applying
/// the post filter on the fine side when enabled.
Field prolong_step(const GridHierarchy& h, int coarse_level, std::span<const double> field,
                   FilterConfig filters);

/// A composed walk between two levels of a hierarchy.  from > to restricts,
/// from < to prolongs, from == to copies.
struct TransferPipeline {
  const GridHierarchy* hierarchy = nullptr;
  FilterConfig filters;
  int from = 0;
  int to = 0;
};

Field pipeline_apply(const TransferPipeline& pipeline, std::span<const double> field);

} // namespace fmlmc
