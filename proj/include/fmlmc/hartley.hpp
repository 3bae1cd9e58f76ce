#pragma once

#include <span>
#include <vector>

#include "fmlmc/grid.hpp"

namespace fmlmc {

/// Discrete Hartley basis adapted to cell-centered periodic grids.
///
/// Column k of the n x n basis matrix is
///     H[j][k] = cos((2j+1) k pi / n) + sin((2j+1) k pi / n),
/// sampled at cell centers (j+1/2)/n.  The columns are orthogonal with
/// H' H = H H' = n I, column 0 is the constant vector of ones, and every
/// symmetric circulant matrix is diagonalized by this basis.  Transforms are
/// applied as direct O(n^2) matrix products against a precomputed table;
/// the grids used for spectral analysis are small enough that a fast
/// butterfly algorithm would only add moving parts.
class HartleyTransform {
public:
  explicit HartleyTransform(int n);

  int size() const { return n_; }
  double entry(int j, int k) const { return basis_[std::size_t(j) * n_ + k]; }

  /// coeffs = H' x (unnormalized analysis).
  void forward(std::span<const double> x, std::span<double> coeffs) const;
  Field forward(std::span<const double> x) const;

  /// x = (1/n) H coeffs; inverse of forward.
  void inverse(std::span<const double> coeffs, std::span<double> x) const;
  Field inverse(std::span<const double> coeffs) const;

private:
  int n_;
  std::vector<double> basis_; // row-major, basis_[j*n + k] = H[j][k]
};

/// One-shot helpers for small n (build the table, transform, discard).
Field hartley_forward(std::span<const double> x);
Field hartley_inverse(std::span<const double> coeffs);

/// Separable 2D analysis on an nx*ny field (flat index k = j*nx + i):
/// coefficient (kx, ky) lands at flat index ky*nx + kx.
Field hartley_forward_2d(std::span<const double> field, const Level2D& level,
                         const HartleyTransform& tx, const HartleyTransform& ty);

/// Permutation that reorders natural Hartley indices by increasing frequency:
/// position 2k holds natural index k, position 2k+1 holds n-1-k.  Natural
/// index k and its mirror n-k share a frequency, so the reordered spectrum is
/// monotone in |frequency|.  Applied only when presenting spectra; all
/// internal algebra stays in natural order.
std::vector<int> frequency_permutation(int n);

/// Damping coefficients c_k = cos(k pi / (2 n0)) for k = 0 .. 2*n0-1, the
/// spectral footprint of the piecewise-constant transfers between a coarse
/// grid of n0 cells and its 2*n0 refinement:
///   prolong:  P h0_k = c_k h1_k - c_{n0+k} h1_{n0+k}
///   restrict: R h1_k = 2 c_k h0_k,   R h1_{n0+k} = -2 c_{n0+k} h0_k
/// The endpoints c_0 = 1 and c_{n0} = 0 are set exactly.
std::vector<double> damping_coefficients(int n0);

/// Eigenvalues of the symmetric circulant with the given first column,
/// ordered to match the Hartley columns: lambda_k = sum_j a_j cos(2 pi j k / n).
/// Throws std::invalid_argument if the column is not symmetric
/// (|a_i - a_{n-i}| > 1e-12 relative).
std::vector<double> circulant_eigenvalues(std::span<const double> first_column);

/// Spectral form of the coarse operator induced by restricting a fine
/// symmetric circulant through the transfer pair (Galerkin product):
///   coarse_k = c_k^e fine_k + c_{n0+k}^e fine_{n0+k},
/// with e = 2 for plain transfers and e = 6 for Shapiro-filtered ones.
/// `fine_eigenvalues` has even size 2*n0; the result has size n0.
std::vector<double> galerkin_coarse_eigenvalues(std::span<const double> fine_eigenvalues,
                                                bool filtered);

/// Hartley representation of a coarse operator round-tripped to the fine
/// grid (prolong, apply, restrict).  The result is 2x2-block sparse: mode k
/// couples only with its alias n0+k.  All three nonzero diagonals, each of
/// length n0:
///   m11[k] = c_k^2p lambda0_k          (consistent modes)
///   m22[k] = c_{n0+k}^2p lambda0_k     (aliased modes)
///   m12[k] = -c_k^p c_{n0+k}^p lambda0_k  (= m21, cross coupling)
/// with p = 1 unfiltered, p = 3 filtered.
struct TwoGridBlocks {
  std::vector<double> m11;
  std::vector<double> m22;
  std::vector<double> m12;
  bool filtered = false;
};

TwoGridBlocks two_grid_blocks(std::span<const double> coarse_eigenvalues, bool filtered);

/// Per-mode damping factors of a two-grid correction as seen from the fine
/// spectrum, for k = 0 .. n1-1 with the complementary index k' = (k+n0) mod n1:
///   consistent_diag[k]    =  c_k^4            (c_k^12 filtered)
///   spurious_diag[k]      =  c_k^2 c_k'^2     (c^6 c'^6)
///   off_diag_consistent[k] = -c_k^3 c_k'      (-c^9 c'^3)
///   off_diag_spurious[k]  = -c_k c_k'^3       (-c^3 c'^9)
/// consistent_diag is 1 at k = 0 and all four factors vanish at k = n0.
struct DampingCurves {
  int n1 = 0;
  bool filtered = false;
  std::vector<double> consistent_diag;
  std::vector<double> spurious_diag;
  std::vector<double> off_diag_consistent;
  std::vector<double> off_diag_spurious;
};

DampingCurves damping_curves(int n1, bool filtered);

} // namespace fmlmc
