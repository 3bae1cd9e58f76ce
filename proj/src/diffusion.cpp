#include "fmlmc/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fmlmc/errors.hpp"
#include "fmlmc/hartley.hpp"

namespace fmlmc {

namespace {

void check_positive_entries(const Field& f, const char* what) {
  for (double v : f)
    if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be strictly positive");
}

}  // namespace

Field apply_laplacian(std::span<const double> u, double k, const Level1D& level) {
  const int n = level.n;
  if (static_cast<int>(u.size()) != n) throw std::invalid_argument("apply_laplacian: size mismatch");
  if (!(k >= 0.0)) throw std::invalid_argument("apply_laplacian: diffusivity must be nonnegative");
  Field out(u.size(), 0.0);
  if (n == 1 || k == 0.0) return out;
  const double c = k * n * static_cast<double>(n);  // k / h^2
  if (n == 2) {
    out[0] = 2.0 * c * (u[1] - u[0]);
    out[1] = 2.0 * c * (u[0] - u[1]);
    return out;
  }
  out[0] = c * (u[n - 1] - 2.0 * u[0] + u[1]);
  for (int i = 1; i < n - 1; ++i) out[i] = c * (u[i - 1] - 2.0 * u[i] + u[i + 1]);
  out[n - 1] = c * (u[n - 2] - 2.0 * u[n - 1] + u[0]);
  return out;
}

Field apply_laplacian(std::span<const double> u, const DiffusivityField2D& k_edges,
                      const Level2D& level) {
  const int nx = level.nx, ny = level.ny;
  const auto cells = static_cast<std::size_t>(level.cells());
  if (u.size() != cells || k_edges.d11.size() != cells || k_edges.d22.size() != cells)
    throw std::invalid_argument("apply_laplacian: size mismatch");
  const double ix2 = 1.0 / (level.hx() * level.hx());
  const double iy2 = 1.0 / (level.hy() * level.hy());
  Field out(cells);
  for (int j = 0; j < ny; ++j) {
    const double* uc = u.data() + static_cast<std::size_t>(j) * nx;
    const double* un = u.data() + static_cast<std::size_t>((j + 1) % ny) * nx;
    const double* us = u.data() + static_cast<std::size_t>((j + ny - 1) % ny) * nx;
    const double* kw = k_edges.d11.data() + static_cast<std::size_t>(j) * nx;
    const double* ks = k_edges.d22.data() + static_cast<std::size_t>(j) * nx;
    const double* kn = k_edges.d22.data() + static_cast<std::size_t>((j + 1) % ny) * nx;
    double* o = out.data() + static_cast<std::size_t>(j) * nx;
    auto cell = [&](int i, int iw, int ie) {
      const double lap = (kw[i] * (uc[iw] - uc[i]) + kw[ie] * (uc[ie] - uc[i])) * ix2 +
                         (ks[i] * (us[i] - uc[i]) + kn[i] * (un[i] - uc[i])) * iy2;
      o[i] = lap;
    };
    cell(0, nx - 1, nx == 1 ? 0 : 1);
    for (int i = 1; i < nx - 1; ++i) cell(i, i - 1, i + 1);
    if (nx > 1) cell(nx - 1, nx - 2, 0);
  }
  // With nx == 1 or ny == 1 a cell is its own periodic neighbor and the
  // differences above cancel, so no special casing is required.
  return out;
}

DiffusivityField2D diffusion_coefficients(const DiffusivityField2D& lengthscales, int m) {
  if (m % 2 != 0 || m < 4)
    throw std::invalid_argument("diffusion_coefficients: m must be even and >= 4 in 2D");
  check_positive_entries(lengthscales.d11, "lengthscale d11");
  check_positive_entries(lengthscales.d22, "lengthscale d22");
  const double inv = 1.0 / (2 * m - 4);
  DiffusivityField2D k = lengthscales;
  for (auto& v : k.d11) v = v * v * inv;
  for (auto& v : k.d22) v = v * v * inv;
  return k;
}

// ---------------------------------------------------------------------------
// 1D simulator

Simulator1D::Simulator1D(DiffusionParams1D params, SimulatorKind kind, LinearSolveConfig solver)
    : params_(params), kind_(kind), solver_(solver) {
  if (params_.level.n < 1) throw std::invalid_argument("Simulator1D: empty grid");
  if (params_.m % 2 != 0 || params_.m < 2)
    throw std::invalid_argument("Simulator1D: m must be even and >= 2");
  if (!(params_.lengthscale >= 0.0))
    throw std::invalid_argument("Simulator1D: negative lengthscale");
  if (solver_.method != SolveMethod::DirectBanded)
    throw std::invalid_argument("Simulator1D: 1D shifted solves are direct");

  const int n = params_.level.n;
  const double c = params_.diffusion_coefficient() * n * static_cast<double>(n);
  diag_ = 1.0 + 2.0 * c;
  off_ = -c;
  if (c == 0.0 || n <= 3) return;

  // (I - Lap) = T + u v' with gamma = -diag: T is plain tridiagonal with
  // first/last pivots adjusted, u = (gamma, 0, .., off), v = (1, 0, .., off/gamma).
  const double gamma = -diag_;
  corner_over_gamma_ = off_ / gamma;
  std::vector<double> d(static_cast<std::size_t>(n), diag_);
  d[0] = diag_ - gamma;
  d[static_cast<std::size_t>(n - 1)] = diag_ - off_ * off_ / gamma;

  thomas_upper_ratio_.resize(static_cast<std::size_t>(n - 1));
  thomas_inv_pivot_.resize(static_cast<std::size_t>(n));
  double w = d[0];
  thomas_inv_pivot_[0] = 1.0 / w;
  for (int i = 0; i < n - 1; ++i) {
    thomas_upper_ratio_[static_cast<std::size_t>(i)] = off_ / w;
    w = d[static_cast<std::size_t>(i + 1)] - off_ * thomas_upper_ratio_[static_cast<std::size_t>(i)];
    thomas_inv_pivot_[static_cast<std::size_t>(i + 1)] = 1.0 / w;
  }

  Field u(static_cast<std::size_t>(n), 0.0);
  u[0] = gamma;
  u[static_cast<std::size_t>(n - 1)] = off_;
  // Thomas solve T z = u, reused for every right-hand side.
  correction_ = u;
  correction_[0] *= thomas_inv_pivot_[0];
  for (int i = 1; i < n; ++i)
    correction_[static_cast<std::size_t>(i)] =
        (u[static_cast<std::size_t>(i)] - off_ * correction_[static_cast<std::size_t>(i - 1)]) *
        thomas_inv_pivot_[static_cast<std::size_t>(i)];
  for (int i = n - 2; i >= 0; --i)
    correction_[static_cast<std::size_t>(i)] -=
        thomas_upper_ratio_[static_cast<std::size_t>(i)] * correction_[static_cast<std::size_t>(i + 1)];
  correction_denom_ =
      1.0 + correction_[0] + corner_over_gamma_ * correction_[static_cast<std::size_t>(n - 1)];
}

Field Simulator1D::solve_helmholtz(std::span<const double> rhs) const {
  const int n = params_.level.n;
  if (static_cast<int>(rhs.size()) != n)
    throw std::invalid_argument("solve_helmholtz: size mismatch");
  const double c = -off_;
  Field y(rhs.begin(), rhs.end());
  if (c == 0.0 || n == 1) return y;
  if (n == 2) {
    // Both neighbors coincide: [[1+2c, -2c], [-2c, 1+2c]].
    const double det = 1.0 + 4.0 * c;
    const double a = 1.0 + 2.0 * c, b = 2.0 * c;
    y[0] = (a * rhs[0] + b * rhs[1]) / det;
    y[1] = (b * rhs[0] + a * rhs[1]) / det;
    return y;
  }
  if (n == 3) {
    // (1+3c) I - c (J - I)...: A = alpha I + beta J with alpha = 1+3c, beta = -c,
    // and alpha + 3 beta = 1, so A^{-1} r = (r + c * sum(r) * 1) / alpha.
    const double s = rhs[0] + rhs[1] + rhs[2];
    const double inv_alpha = 1.0 / (1.0 + 3.0 * c);
    for (int i = 0; i < 3; ++i) y[static_cast<std::size_t>(i)] = (rhs[i] + c * s) * inv_alpha;
    return y;
  }
  // Thomas solve T y = rhs, then rank-one correction for the periodic corners.
  y[0] *= thomas_inv_pivot_[0];
  for (int i = 1; i < n; ++i)
    y[static_cast<std::size_t>(i)] =
        (rhs[i] - off_ * y[static_cast<std::size_t>(i - 1)]) * thomas_inv_pivot_[static_cast<std::size_t>(i)];
  for (int i = n - 2; i >= 0; --i)
    y[static_cast<std::size_t>(i)] -=
        thomas_upper_ratio_[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i + 1)];
  const double fac =
      (y[0] + corner_over_gamma_ * y[static_cast<std::size_t>(n - 1)]) / correction_denom_;
  for (int i = 0; i < n; ++i)
    y[static_cast<std::size_t>(i)] -= fac * correction_[static_cast<std::size_t>(i)];
  return y;
}

Field Simulator1D::apply_factor(std::span<const double> x) const {
  Field z(x.begin(), x.end());
  const double inv_w = static_cast<double>(params_.level.n);
  for (auto& v : z) v *= inv_w;
  for (int j = 0; j < params_.q(); ++j) z = solve_helmholtz(z);
  return z;
}

Field Simulator1D::apply(std::span<const double> x) const {
  Field y = apply_factor(x);
  if (kind_ == SimulatorKind::SquaredField)
    for (auto& v : y) v *= v;
  return y;
}

// ---------------------------------------------------------------------------
// 2D simulator

Simulator2D::Simulator2D(DiffusionParams2D params, SimulatorKind kind, LinearSolveConfig solver)
    : params_(std::move(params)), kind_(kind), solver_(solver) {
  const Level2D& lv = level();
  if (lv.nx < 1 || lv.ny < 1) throw std::invalid_argument("Simulator2D: empty grid");
  if (solver_.method != SolveMethod::ConjugateGradient)
    throw std::invalid_argument("Simulator2D: 2D shifted solves use conjugate gradient");
  k_ = diffusion_coefficients(params_.lengthscales, params_.m);

  const int nx = lv.nx, ny = lv.ny;
  const double ix2 = 1.0 / (lv.hx() * lv.hx());
  const double iy2 = 1.0 / (lv.hy() * lv.hy());
  jacobi_inv_.resize(cells());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const std::size_t idx = static_cast<std::size_t>(j) * nx + i;
      const double ke = k_.d11[static_cast<std::size_t>(j) * nx + (i + 1) % nx];
      const double kn = k_.d22[static_cast<std::size_t>((j + 1) % ny) * nx + i];
      jacobi_inv_[idx] = 1.0 / (1.0 + (k_.d11[idx] + ke) * ix2 + (k_.d22[idx] + kn) * iy2);
    }
}

Field Simulator2D::apply_shifted(std::span<const double> u) const {
  const Level2D& lv = level();
  const int nx = lv.nx, ny = lv.ny;
  const double ix2 = 1.0 / (lv.hx() * lv.hx());
  const double iy2 = 1.0 / (lv.hy() * lv.hy());
  Field out(u.size());
  for (int j = 0; j < ny; ++j) {
    const double* uc = u.data() + static_cast<std::size_t>(j) * nx;
    const double* un = u.data() + static_cast<std::size_t>((j + 1) % ny) * nx;
    const double* us = u.data() + static_cast<std::size_t>((j + ny - 1) % ny) * nx;
    const double* kw = k_.d11.data() + static_cast<std::size_t>(j) * nx;
    const double* ks = k_.d22.data() + static_cast<std::size_t>(j) * nx;
    const double* kn = k_.d22.data() + static_cast<std::size_t>((j + 1) % ny) * nx;
    double* o = out.data() + static_cast<std::size_t>(j) * nx;
    auto cell = [&](int i, int iw, int ie) {
      const double lap = (kw[i] * (uc[iw] - uc[i]) + kw[ie] * (uc[ie] - uc[i])) * ix2 +
                         (ks[i] * (us[i] - uc[i]) + kn[i] * (un[i] - uc[i])) * iy2;
      o[i] = uc[i] - lap;
    };
    cell(0, nx - 1, nx == 1 ? 0 : 1);
    for (int i = 1; i < nx - 1; ++i) cell(i, i - 1, i + 1);
    if (nx > 1) cell(nx - 1, nx - 2, 0);
  }
  return out;
}

Field Simulator2D::solve_helmholtz(std::span<const double> rhs) const {
  const std::size_t n = cells();
  if (rhs.size() != n) throw std::invalid_argument("solve_helmholtz: size mismatch");
  double rhs_norm2 = 0.0;
  for (double v : rhs) rhs_norm2 += v * v;
  Field y(n, 0.0);
  if (rhs_norm2 == 0.0) return y;

  const double tol2 = solver_.tolerance * solver_.tolerance * rhs_norm2;
  const int max_iters = solver_.max_iterations > 0
                            ? solver_.max_iterations
                            : std::max(200, 10 * static_cast<int>(std::ceil(std::sqrt(
                                                    static_cast<double>(n)))));

  Field r(rhs.begin(), rhs.end());
  Field z(n), p(n), q(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = jacobi_inv_[i] * r[i];
  p = z;
  double rz = 0.0;
  for (std::size_t i = 0; i < n; ++i) rz += r[i] * z[i];

  double r_norm2 = rhs_norm2;
  for (int it = 0; it < max_iters; ++it) {
    q = apply_shifted(p);
    double pq = 0.0;
    for (std::size_t i = 0; i < n; ++i) pq += p[i] * q[i];
    const double alpha = rz / pq;
    r_norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] += alpha * p[i];
      r[i] -= alpha * q[i];
      r_norm2 += r[i] * r[i];
    }
    if (r_norm2 <= tol2) return y;
    double rz_next = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = jacobi_inv_[i] * r[i];
      rz_next += r[i] * z[i];
    }
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw SolverError("conjugate gradient exhausted its iteration budget",
                    std::sqrt(r_norm2 / rhs_norm2));
}

Field Simulator2D::apply_factor(std::span<const double> x) const {
  Field z(x.begin(), x.end());
  const double inv_w = 1.0 / gram_weight();
  for (auto& v : z) v *= inv_w;
  for (int j = 0; j < params_.q(); ++j) z = solve_helmholtz(z);
  return z;
}

Field Simulator2D::apply(std::span<const double> x) const {
  Field y = apply_factor(x);
  if (kind_ == SimulatorKind::SquaredField)
    for (auto& v : y) v *= v;
  return y;
}

// ---------------------------------------------------------------------------
// Sampling

Field sample_input(std::size_t cells, double gram_weight, RandomStream& rng) {
  const double s = std::sqrt(gram_weight);
  Field x(cells);
  for (auto& v : x) v = s * rng.next_normal();
  return x;
}

namespace {

// sqrt of the circulant squared-exponential covariance along one periodic
// axis: eigenvalues of the kernel circulant, clamped at zero (they are
// positive up to roundoff), returned as scale factors for Hartley modes.
std::vector<double> axis_sqrt_eigenvalues(int n, double spacing, double period,
                                          double lengthscale) {
  Field col(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double d = std::min(i * spacing, period - i * spacing);
    col[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * lengthscale * lengthscale));
  }
  auto lam = circulant_eigenvalues(col);
  for (auto& v : lam) v = std::sqrt(std::max(v, 0.0));
  return lam;
}

// In-place per-axis filtering: every row (stride 1) and column (stride nx)
// is pushed through H diag(scale) H' / n.
void filter_axis(Field& f, int count, int stride, int len, const HartleyTransform& t,
                 const std::vector<double>& scale) {
  Field slice(static_cast<std::size_t>(len)), coeffs(static_cast<std::size_t>(len));
  for (int s = 0; s < count; ++s) {
    const std::size_t base = static_cast<std::size_t>(s) * (stride == 1 ? len : 1);
    for (int i = 0; i < len; ++i) slice[static_cast<std::size_t>(i)] = f[base + static_cast<std::size_t>(i) * stride];
    t.forward(slice, coeffs);
    for (int i = 0; i < len; ++i) coeffs[static_cast<std::size_t>(i)] *= scale[static_cast<std::size_t>(i)];
    t.inverse(coeffs, slice);
    for (int i = 0; i < len; ++i) f[base + static_cast<std::size_t>(i) * stride] = slice[static_cast<std::size_t>(i)];
  }
}

Field sample_grf_lattice(const GrfParams& params, const Level2D& level, std::uint64_t key) {
  const int nx = level.nx, ny = level.ny;
  RandomStream rng(key);
  Field f(static_cast<std::size_t>(level.cells()));
  for (auto& v : f) v = rng.next_normal();
  if (params.stddev > 0.0) {
    HartleyTransform tx(nx), ty(ny);
    auto sx = axis_sqrt_eigenvalues(nx, level.hx(), 2.0, params.lengthscale);
    auto sy = axis_sqrt_eigenvalues(ny, level.hy(), 1.0, params.lengthscale);
    filter_axis(f, ny, 1, nx, tx, sx);
    filter_axis(f, nx, nx, ny, ty, sy);
    for (auto& v : f) v *= params.stddev;
  } else {
    for (auto& v : f) v = 0.0;
  }
  const double floor = params.mean / 10.0;
  for (auto& v : f) v = std::max(params.mean + v, floor);
  return f;
}

}  // namespace

DiffusivityField2D sample_lengthscale_fields(const GrfParams& params, const Level2D& level) {
  if (!(params.mean > 0.0))
    throw std::invalid_argument("sample_lengthscale_fields: mean must be positive");
  DiffusivityField2D out;
  out.level = level;
  out.d11 = sample_grf_lattice(
      params, level,
      derive_stream(params.seed, StreamTag::lengthscale_field, 0, static_cast<std::uint64_t>(level.nx)));
  out.d22 = sample_grf_lattice(
      params, level,
      derive_stream(params.seed, StreamTag::lengthscale_field, 1, static_cast<std::uint64_t>(level.nx)));
  return out;
}

DiffusivityField2D restrict_lengthscale(const DiffusivityField2D& fine) {
  const int nx = fine.level.nx, ny = fine.level.ny;
  if (nx % 2 != 0 || ny % 2 != 0 || nx < 4 || ny < 4)
    throw std::invalid_argument("restrict_lengthscale: level has no coarser neighbor");
  DiffusivityField2D out;
  out.level = Level2D{nx / 2, ny / 2};
  const int cx = nx / 2, cy = ny / 2;
  out.d11.resize(static_cast<std::size_t>(cx) * cy);
  out.d22.resize(static_cast<std::size_t>(cx) * cy);
  for (int j = 0; j < cy; ++j)
    for (int i = 0; i < cx; ++i) {
      const std::size_t c = static_cast<std::size_t>(j) * cx + i;
      // Vertical edges keep their x-column and average along y (the edge
      // direction); horizontal edges the other way around.
      out.d11[c] = 0.5 * (fine.d11[static_cast<std::size_t>(2 * j) * nx + 2 * i] +
                          fine.d11[static_cast<std::size_t>(2 * j + 1) * nx + 2 * i]);
      out.d22[c] = 0.5 * (fine.d22[static_cast<std::size_t>(2 * j) * nx + 2 * i] +
                          fine.d22[static_cast<std::size_t>(2 * j) * nx + 2 * i + 1]);
    }
  return out;
}

namespace {

template <typename Sim>
Field exact_theta_impl(const Sim& sim, int cell_cap) {
  const std::size_t n = sim.cells();
  if (n > static_cast<std::size_t>(cell_cap))
    throw std::invalid_argument("exact_theta: grid exceeds the configured cell cap");
  const double w = sim.gram_weight();
  Field theta(n), e(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    e[k] = 1.0;
    Field a = sim.apply_factor(e);
    e[k] = 0.0;
    double s = 0.0;
    for (double v : a) s += v * v;
    theta[k] = w * s;
  }
  return theta;
}

}  // namespace

Field exact_theta(const Simulator1D& sim, int cell_cap) { return exact_theta_impl(sim, cell_cap); }
Field exact_theta(const Simulator2D& sim, int cell_cap) { return exact_theta_impl(sim, cell_cap); }

Field normalization_coefficients(std::span<const double> theta) {
  Field gamma(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!(theta[i] > 0.0))
      throw std::invalid_argument("normalization_coefficients: nonpositive variance entry");
    gamma[i] = 1.0 / std::sqrt(theta[i]);
  }
  return gamma;
}

}  // namespace fmlmc
