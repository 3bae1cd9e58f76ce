#pragma once

#include <span>
#include <vector>

#include "fmlmc/estimators.hpp"
#include "fmlmc/grid.hpp"

namespace fmlmc {

/// Ensemble variance resolved per spectral mode.  `nu` holds the per-mode
/// variances in increasing-frequency order (2D: row-major over the reordered
/// (jx, jy) frequency grid), `nu_cml` the running totals (2D: over nested
/// rectangles that grow one frequency row and two frequency columns per
/// step), and `total` their common endpoint.
struct SpectralDiagnostics {
  std::vector<double> nu;
  std::vector<double> nu_cml;
  double total = 0.0;
  int ensemble_size = 0;
  int nx = 0;  // mode-grid width (the full mode count in 1D)
  int ny = 1;  // mode-grid height (1 in 1D)
  EstimatorKind kind = EstimatorKind::MonteCarlo;
  int depth = 0;
};

/// Per-mode variance of a 1D ensemble: nu_k = n^-2 Var[(h_k)' u] with the
/// unbiased sample variance taken across members, reordered by frequency.
/// The n^-2 scaling makes sum(nu) the ensemble variance in the weighted norm
/// (weight 1/n), which is exactly what the cumulative curve accumulates.
SpectralDiagnostics spectral_variance_1d(const std::vector<Field>& estimates);
SpectralDiagnostics spectral_variance_1d(const std::vector<EstimatorRun>& runs);

/// 2D analogue with nu_k = 4 n^-2 Var[(h_k)' u] over the separable basis and
/// both axes frequency-reordered.  The cumulative entry for frequency row k
/// sums the rectangle jy <= k, jx <= 2k+1, so the last entry covers the whole
/// grid; the 4 n^-2 scaling makes that endpoint twice the weighted-norm
/// ensemble variance (weight 2/n).  Requires nx == 2 ny, the only aspect
/// ratio the rectangle schedule tiles exactly.
SpectralDiagnostics spectral_variance_2d(const std::vector<Field>& estimates,
                                         const Level2D& level);
SpectralDiagnostics spectral_variance_2d(const std::vector<EstimatorRun>& runs,
                                         const Level2D& level);

/// Error split of an ensemble against a known truth, all in the weighted
/// norm with the given cell weight:
///   variance     = unbiased mean of ||u - ensemble mean||^2
///   squared_bias = ||ensemble mean - truth||^2
///   raw_mse      = plain mean of ||u - truth||^2
/// The three satisfy raw_mse = (E-1)/E * variance + squared_bias exactly.
struct MseDecomposition {
  double variance = 0.0;
  double squared_bias = 0.0;
  double raw_mse = 0.0;
};

MseDecomposition mse_decompose(const std::vector<Field>& estimates, std::span<const double> truth,
                               double gram_weight);

}  // namespace fmlmc
