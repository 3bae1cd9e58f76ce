#pragma once

#include <cstdint>
#include <span>

#include "fmlmc/grid.hpp"
#include "fmlmc/rng.hpp"

namespace fmlmc {

enum class SolveMethod {
  DirectBanded,       // cyclic tridiagonal factorization, 1D only, exact
  ConjugateGradient,  // matrix-free Jacobi-preconditioned CG, any dimension
};

struct LinearSolveConfig {
  SolveMethod method = SolveMethod::DirectBanded;
  /// CG stops when ||r|| <= tolerance * ||rhs||.
  double tolerance = 1e-10;
  /// 0 means automatic: max(200, 10 * ceil(sqrt(n))).
  int max_iterations = 0;

  static LinearSolveConfig direct() { return {SolveMethod::DirectBanded, 1e-10, 0}; }
  static LinearSolveConfig cg() { return {SolveMethod::ConjugateGradient, 1e-10, 0}; }
};

/// Parameters of the 1D constant-coefficient simulator.  The smoothness
/// exponent m = 2q must be even; the diffusion coefficient is
/// K = D^2 / (2m - 3), which ties the correlation length of the sampled
/// fields to `lengthscale`.
struct DiffusionParams1D {
  double lengthscale = 0.0;  // D, in domain units
  int m = 10;                // even smoothness exponent, m = 2q
  Level1D level;

  int q() const { return m / 2; }
  double diffusion_coefficient() const { return lengthscale * lengthscale / (2 * m - 3); }
};

/// A pair of edge-centered scalar fields on a staggered 2D lattice.  d11
/// lives at vertical-edge midpoints (x = i*hx, y = (j+1/2)*hy), the west face
/// of cell (i, j); d22 lives at horizontal-edge midpoints, the south face.
/// Both are stored flat as j*nx + i, one value per cell.  Used both for
/// length-scale fields and for the diffusion coefficients derived from them.
struct DiffusivityField2D {
  Field d11;
  Field d22;
  Level2D level;
};

/// Parameters of the 2D heterogeneous simulator: anisotropic length-scale
/// fields plus the smoothness exponent.  K_ii = D_ii^2 / (2m - 4) per edge.
struct DiffusionParams2D {
  DiffusivityField2D lengthscales;
  int m = 10;

  int q() const { return m / 2; }
};

/// Stationary Gaussian random field parameters for the 2D length scales:
/// squared-exponential covariance c(r) = stddev^2 * exp(-r^2 / (2 L^2)) on
/// the periodic rectangle, mean-shifted and clamped at mean/10 from below.
struct GrfParams {
  double mean = 0.0;
  double stddev = 0.0;  // experiments fix stddev = mean / 5
  double lengthscale = 0.0;
  std::uint64_t seed = 0;
};

enum class SimulatorKind {
  LinearField,   // f(x) = A x
  SquaredField,  // f(x) = (A x) .* (A x)
};

/// Conservative finite-difference divergence-form Laplacian with periodic
/// BCs: (Lap u)_c = sum_faces K_face (u_nb - u_c) / h^2, h per direction.
Field apply_laplacian(std::span<const double> u, double k, const Level1D& level);
Field apply_laplacian(std::span<const double> u, const DiffusivityField2D& k_edges,
                      const Level2D& level);

/// Edge diffusion coefficients K_ii = D_ii^2 / (2m - 4) from length scales.
DiffusivityField2D diffusion_coefficients(const DiffusivityField2D& lengthscales, int m);

/// 1D simulator around A = (I - Lap)^{-q} W^{-1}.  The shifted solves use an
/// exact cyclic tridiagonal factorization computed once at construction.
class Simulator1D {
 public:
  Simulator1D(DiffusionParams1D params, SimulatorKind kind,
              LinearSolveConfig solver = LinearSolveConfig::direct());

  const DiffusionParams1D& params() const { return params_; }
  SimulatorKind kind() const { return kind_; }
  std::size_t cells() const { return static_cast<std::size_t>(params_.level.n); }
  double gram_weight() const { return 1.0 / params_.level.n; }

  /// Solves (I - Lap) y = rhs.
  Field solve_helmholtz(std::span<const double> rhs) const;
  /// y = A x, via q shifted solves of (I - Lap) y = z starting from z = x/w.
  Field apply_factor(std::span<const double> x) const;
  /// The quantity of interest f(x).
  Field apply(std::span<const double> x) const;

 private:
  DiffusionParams1D params_;
  SimulatorKind kind_;
  LinearSolveConfig solver_;
  // Cached Sherman-Morrison/Thomas factorization of (I - Lap); empty when
  // the diffusion coefficient is zero or n <= 3 (handled in closed form).
  double diag_ = 1.0;
  double off_ = 0.0;
  std::vector<double> thomas_upper_ratio_;
  std::vector<double> thomas_inv_pivot_;
  std::vector<double> correction_;  // T^{-1} u
  double correction_denom_ = 1.0;
  double corner_over_gamma_ = 0.0;
};

/// 2D simulator with heterogeneous anisotropic diffusion; shifted solves use
/// matrix-free Jacobi-preconditioned CG.
class Simulator2D {
 public:
  Simulator2D(DiffusionParams2D params, SimulatorKind kind,
              LinearSolveConfig solver = LinearSolveConfig::cg());

  const DiffusionParams2D& params() const { return params_; }
  const DiffusivityField2D& diffusion() const { return k_; }
  SimulatorKind kind() const { return kind_; }
  std::size_t cells() const { return static_cast<std::size_t>(level().cells()); }
  const Level2D& level() const { return params_.lengthscales.level; }
  double gram_weight() const { return 2.0 / level().cells(); }

  /// Solves (I - Lap) y = rhs; throws SolverError if CG stalls.
  Field solve_helmholtz(std::span<const double> rhs) const;
  Field apply_factor(std::span<const double> x) const;
  Field apply(std::span<const double> x) const;

 private:
  Field apply_shifted(std::span<const double> u) const;  // (I - Lap) u

  DiffusionParams2D params_;
  SimulatorKind kind_;
  LinearSolveConfig solver_;
  DiffusivityField2D k_;
  Field jacobi_inv_;  // reciprocal diagonal of (I - Lap)
};

/// Draws X ~ N(0, W) with W = gram_weight * I, i.e. sqrt(w) * Z.
Field sample_input(std::size_t cells, double gram_weight, RandomStream& rng);

/// Samples the two edge-centered length-scale fields as independent
/// realizations of the stationary GRF (spectral synthesis per axis on the
/// periodic rectangle, eigenvalues clamped at zero), then shifts by the mean
/// and clamps at mean/10 to keep the diffusion tensor positive definite.
DiffusivityField2D sample_lengthscale_fields(const GrfParams& params, const Level2D& level);

/// Edge-value restriction to the next coarser level: each coarse value is the
/// mean of the 2 nearest same-orientation fine values along the edge-aligned
/// direction (d11 along y, d22 along x).
DiffusivityField2D restrict_lengthscale(const DiffusivityField2D& fine);

/// Exact diagonal of the field covariance L = (I - Lap)^{-m} W^{-1}:
/// theta_k = (L e_k)_k = w ||A e_k||^2, via q solves per column.  Guarded by
/// `cell_cap` since the cost is n columns * q solves.
Field exact_theta(const Simulator1D& sim, int cell_cap = 16384);
Field exact_theta(const Simulator2D& sim, int cell_cap = 16384);

/// Per-mode normalization gamma_k = theta_k^{-1/2}; throws on theta_k <= 0.
Field normalization_coefficients(std::span<const double> theta);

}  // namespace fmlmc
