#include "fmlmc/hartley.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fmlmc {

namespace {

constexpr int kMaxTransformSize = 4096;

void check_size(std::size_t got, std::size_t want, const char* who) {
  if (got != want)
    throw std::invalid_argument(std::string(who) + ": expected size " + std::to_string(want) +
                                ", got " + std::to_string(got));
}

} // namespace

HartleyTransform::HartleyTransform(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("hartley: size must be positive");
  if (n > kMaxTransformSize)
    throw std::invalid_argument("hartley: size " + std::to_string(n) +
                                " exceeds the dense-transform cap of " +
                                std::to_string(kMaxTransformSize));
  basis_.resize(std::size_t(n) * n);
  for (int j = 0; j < n; ++j) {
    basis_[std::size_t(j) * n] = 1.0; // k = 0: constant column, exact
    for (int k = 1; k < n; ++k) {
      // Reduce (2j+1)k modulo 2n before multiplying by pi/n to keep the
      // argument small; the basis entries then stay accurate for large j*k.
      const long long phase = (2LL * j + 1) * k % (2LL * n);
      const double theta = std::numbers::pi * double(phase) / double(n);
      basis_[std::size_t(j) * n + k] = std::cos(theta) + std::sin(theta);
    }
  }
}

void HartleyTransform::forward(std::span<const double> x, std::span<double> coeffs) const {
  check_size(x.size(), std::size_t(n_), "hartley forward");
  check_size(coeffs.size(), std::size_t(n_), "hartley forward output");
  for (int k = 0; k < n_; ++k) coeffs[k] = 0.0;
  for (int j = 0; j < n_; ++j) {
    const double xj = x[j];
    const double* row = basis_.data() + std::size_t(j) * n_;
    for (int k = 0; k < n_; ++k) coeffs[k] += row[k] * xj;
  }
}

Field HartleyTransform::forward(std::span<const double> x) const {
  Field coeffs(n_);
  forward(x, coeffs);
  return coeffs;
}

void HartleyTransform::inverse(std::span<const double> coeffs, std::span<double> x) const {
  check_size(coeffs.size(), std::size_t(n_), "hartley inverse");
  check_size(x.size(), std::size_t(n_), "hartley inverse output");
  const double scale = 1.0 / n_;
  for (int j = 0; j < n_; ++j) {
    const double* row = basis_.data() + std::size_t(j) * n_;
    double acc = 0.0;
    for (int k = 0; k < n_; ++k) acc += row[k] * coeffs[k];
    x[j] = scale * acc;
  }
}

Field HartleyTransform::inverse(std::span<const double> coeffs) const {
  Field x(n_);
  inverse(coeffs, x);
  return x;
}

Field hartley_forward(std::span<const double> x) {
  return HartleyTransform(int(x.size())).forward(x);
}

Field hartley_inverse(std::span<const double> coeffs) {
  return HartleyTransform(int(coeffs.size())).inverse(coeffs);
}

Field hartley_forward_2d(std::span<const double> field, const Level2D& level,
                         const HartleyTransform& tx, const HartleyTransform& ty) {
  const int nx = level.nx, ny = level.ny;
  check_size(field.size(), std::size_t(nx) * ny, "hartley forward 2d");
  if (tx.size() != nx || ty.size() != ny)
    throw std::invalid_argument("hartley forward 2d: transform sizes do not match level");

  Field rows(std::size_t(nx) * ny);
  for (int j = 0; j < ny; ++j)
    tx.forward(field.subspan(std::size_t(j) * nx, nx),
               std::span<double>(rows.data() + std::size_t(j) * nx, nx));

  Field coeffs(std::size_t(nx) * ny, 0.0);
  for (int j = 0; j < ny; ++j) {
    const double* row = rows.data() + std::size_t(j) * nx;
    for (int m = 0; m < ny; ++m) {
      const double hy = ty.entry(j, m);
      double* out = coeffs.data() + std::size_t(m) * nx;
      for (int k = 0; k < nx; ++k) out[k] += hy * row[k];
    }
  }
  return coeffs;
}

std::vector<int> frequency_permutation(int n) {
  if (n < 1) throw std::invalid_argument("frequency_permutation: size must be positive");
  std::vector<int> p(n);
  for (int j = 0; j < n; ++j) p[j] = (j % 2 == 0) ? j / 2 : n - 1 - (j - 1) / 2;
  return p;
}

std::vector<double> damping_coefficients(int n0) {
  if (n0 < 1) throw std::invalid_argument("damping_coefficients: n0 must be positive");
  std::vector<double> c(std::size_t(2) * n0);
  c[0] = 1.0;
  for (int k = 1; k < 2 * n0; ++k)
    c[k] = std::cos(std::numbers::pi * double(k) / double(2 * n0));
  c[n0] = 0.0;
  return c;
}

std::vector<double> circulant_eigenvalues(std::span<const double> first_column) {
  const int n = int(first_column.size());
  if (n < 1) throw std::invalid_argument("circulant_eigenvalues: empty column");
  double scale = 0.0;
  for (double v : first_column) scale = std::max(scale, std::abs(v));
  const double tol = 1e-12 * (scale > 0.0 ? scale : 1.0);
  for (int i = 1; i < n; ++i)
    if (std::abs(first_column[i] - first_column[n - i]) > tol)
      throw std::invalid_argument("circulant_eigenvalues: first column is not symmetric");

  std::vector<double> eig(n);
  for (int k = 0; k < n; ++k) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const long long phase = 2LL * j * k % (2LL * n);
      acc += first_column[j] * std::cos(std::numbers::pi * double(phase) / double(n));
    }
    eig[k] = acc;
  }
  return eig;
}

std::vector<double> galerkin_coarse_eigenvalues(std::span<const double> fine_eigenvalues,
                                                bool filtered) {
  const int n1 = int(fine_eigenvalues.size());
  if (n1 < 2 || n1 % 2 != 0)
    throw std::invalid_argument("galerkin_coarse_eigenvalues: fine spectrum size must be even");
  const int n0 = n1 / 2;
  const std::vector<double> c = damping_coefficients(n0);
  const int e = filtered ? 6 : 2;
  std::vector<double> coarse(n0);
  for (int k = 0; k < n0; ++k)
    coarse[k] = std::pow(c[k], e) * fine_eigenvalues[k] +
                std::pow(c[n0 + k], e) * fine_eigenvalues[n0 + k];
  return coarse;
}

TwoGridBlocks two_grid_blocks(std::span<const double> coarse_eigenvalues, bool filtered) {
  const int n0 = int(coarse_eigenvalues.size());
  if (n0 < 1) throw std::invalid_argument("two_grid_blocks: empty spectrum");
  const std::vector<double> c = damping_coefficients(n0);
  TwoGridBlocks b;
  b.filtered = filtered;
  b.m11.resize(n0);
  b.m22.resize(n0);
  b.m12.resize(n0);
  for (int k = 0; k < n0; ++k) {
    const double lo = filtered ? c[k] * c[k] * c[k] : c[k];
    const double hi = filtered ? c[n0 + k] * c[n0 + k] * c[n0 + k] : c[n0 + k];
    b.m11[k] = lo * lo * coarse_eigenvalues[k];
    b.m22[k] = hi * hi * coarse_eigenvalues[k];
    b.m12[k] = -lo * hi * coarse_eigenvalues[k];
  }
  return b;
}

DampingCurves damping_curves(int n1, bool filtered) {
  if (n1 < 2 || n1 % 2 != 0)
    throw std::invalid_argument("damping_curves: n1 must be even and >= 2");
  const int n0 = n1 / 2;
  const std::vector<double> c = damping_coefficients(n0);
  DampingCurves d;
  d.n1 = n1;
  d.filtered = filtered;
  d.consistent_diag.resize(n1);
  d.spurious_diag.resize(n1);
  d.off_diag_consistent.resize(n1);
  d.off_diag_spurious.resize(n1);
  for (int k = 0; k < n1; ++k) {
    const int kc = (k + n0) % n1;
    const double a = filtered ? c[k] * c[k] * c[k] : c[k];
    const double b = filtered ? c[kc] * c[kc] * c[kc] : c[kc];
    d.consistent_diag[k] = a * a * a * a;
    d.spurious_diag[k] = a * a * b * b;
    d.off_diag_consistent[k] = -a * a * a * b;
    d.off_diag_spurious[k] = -a * b * b * b;
  }
  return d;
}

} // namespace fmlmc
