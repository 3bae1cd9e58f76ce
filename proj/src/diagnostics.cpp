#include "fmlmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "fmlmc/hartley.hpp"

namespace fmlmc {

namespace {

using FieldAt = std::function<const Field&(std::size_t)>;

void check_ensemble(std::size_t count, const FieldAt& field_at, std::size_t n) {
  if (count < 2) throw std::invalid_argument("spectral_variance: ensemble size must be >= 2");
  for (std::size_t r = 0; r < count; ++r)
    if (field_at(r).size() != n)
      throw std::invalid_argument("spectral_variance: estimate length mismatch");
}

/// Unbiased per-mode variance of the transformed members, natural mode order.
/// Two passes (mean, then squared deviations) keep the reduction order fixed
/// and free of cancellation, at the price of transforming each member twice.
std::vector<double> mode_variances(std::size_t count, const FieldAt& field_at, std::size_t n,
                                   const std::function<void(const Field&, Field&)>& transform) {
  Field coeff(n), mean(n, 0.0);
  for (std::size_t r = 0; r < count; ++r) {
    transform(field_at(r), coeff);
    for (std::size_t k = 0; k < n; ++k) mean[k] += coeff[k];
  }
  for (auto& v : mean) v /= static_cast<double>(count);

  std::vector<double> ssq(n, 0.0);
  for (std::size_t r = 0; r < count; ++r) {
    transform(field_at(r), coeff);
    for (std::size_t k = 0; k < n; ++k) {
      const double d = coeff[k] - mean[k];
      ssq[k] += d * d;
    }
  }
  for (auto& v : ssq) v = std::max(0.0, v / static_cast<double>(count - 1));
  return ssq;
}

SpectralDiagnostics spectral_1d_impl(std::size_t count, const FieldAt& field_at) {
  const std::size_t n = field_at(0).size();
  check_ensemble(count, field_at, n);
  HartleyTransform t(static_cast<int>(n));
  auto nat = mode_variances(count, field_at, n, [&t](const Field& x, Field& c) {
    t.forward(x, c);
  });
  const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  for (auto& v : nat) v *= scale;

  SpectralDiagnostics d;
  d.ensemble_size = static_cast<int>(count);
  d.nx = static_cast<int>(n);
  d.ny = 1;
  const auto perm = frequency_permutation(static_cast<int>(n));
  d.nu.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.nu[i] = nat[static_cast<std::size_t>(perm[i])];
  d.nu_cml.resize(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += d.nu[i];
    d.nu_cml[i] = acc;
  }
  d.total = acc;
  return d;
}

SpectralDiagnostics spectral_2d_impl(std::size_t count, const FieldAt& field_at,
                                     const Level2D& level) {
  const std::size_t n = level.cells();
  if (level.nx != 2 * level.ny)
    throw std::invalid_argument("spectral_variance_2d: grid must have nx == 2 ny");
  check_ensemble(count, field_at, n);
  HartleyTransform tx(level.nx), ty(level.ny);
  auto nat = mode_variances(count, field_at, n, [&](const Field& x, Field& c) {
    Field full = hartley_forward_2d(x, level, tx, ty);
    std::copy(full.begin(), full.end(), c.begin());
  });
  const double scale = 4.0 / (static_cast<double>(n) * static_cast<double>(n));
  for (auto& v : nat) v *= scale;

  SpectralDiagnostics d;
  d.ensemble_size = static_cast<int>(count);
  d.nx = level.nx;
  d.ny = level.ny;
  const auto px = frequency_permutation(level.nx);
  const auto py = frequency_permutation(level.ny);
  d.nu.resize(n);
  for (int jy = 0; jy < level.ny; ++jy)
    for (int jx = 0; jx < level.nx; ++jx)
      d.nu[static_cast<std::size_t>(jy) * level.nx + jx] =
          nat[static_cast<std::size_t>(py[jy]) * level.nx + px[jx]];

  // Nested rectangles: frequency rows 0..k crossed with columns 0..2k+1.
  d.nu_cml.resize(static_cast<std::size_t>(level.ny));
  for (int k = 0; k < level.ny; ++k) {
    double acc = 0.0;
    for (int jy = 0; jy <= k; ++jy)
      for (int jx = 0; jx <= 2 * k + 1; ++jx)
        acc += d.nu[static_cast<std::size_t>(jy) * level.nx + jx];
    d.nu_cml[static_cast<std::size_t>(k)] = acc;
  }
  d.total = d.nu_cml.back();
  return d;
}

FieldAt fields_accessor(const std::vector<Field>& estimates) {
  return [&estimates](std::size_t r) -> const Field& { return estimates[r]; };
}

FieldAt runs_accessor(const std::vector<EstimatorRun>& runs) {
  return [&runs](std::size_t r) -> const Field& { return runs[r].estimate; };
}

void stamp_metadata(SpectralDiagnostics& d, const std::vector<EstimatorRun>& runs) {
  d.kind = runs.front().kind;
  d.depth = runs.front().depth;
}

}  // namespace

SpectralDiagnostics spectral_variance_1d(const std::vector<Field>& estimates) {
  if (estimates.empty()) throw std::invalid_argument("spectral_variance: empty ensemble");
  return spectral_1d_impl(estimates.size(), fields_accessor(estimates));
}

SpectralDiagnostics spectral_variance_1d(const std::vector<EstimatorRun>& runs) {
  if (runs.empty()) throw std::invalid_argument("spectral_variance: empty ensemble");
  auto d = spectral_1d_impl(runs.size(), runs_accessor(runs));
  stamp_metadata(d, runs);
  return d;
}

SpectralDiagnostics spectral_variance_2d(const std::vector<Field>& estimates,
                                         const Level2D& level) {
  if (estimates.empty()) throw std::invalid_argument("spectral_variance: empty ensemble");
  return spectral_2d_impl(estimates.size(), fields_accessor(estimates), level);
}

SpectralDiagnostics spectral_variance_2d(const std::vector<EstimatorRun>& runs,
                                         const Level2D& level) {
  if (runs.empty()) throw std::invalid_argument("spectral_variance: empty ensemble");
  auto d = spectral_2d_impl(runs.size(), runs_accessor(runs), level);
  stamp_metadata(d, runs);
  return d;
}

MseDecomposition mse_decompose(const std::vector<Field>& estimates, std::span<const double> truth,
                               double gram_weight) {
  if (estimates.size() < 2) throw std::invalid_argument("mse_decompose: ensemble size must be >= 2");
  const std::size_t n = truth.size();
  for (const auto& e : estimates)
    if (e.size() != n) throw std::invalid_argument("mse_decompose: estimate length mismatch");

  const double count = static_cast<double>(estimates.size());
  Field mean(n, 0.0);
  for (const auto& e : estimates)
    for (std::size_t i = 0; i < n; ++i) mean[i] += e[i];
  for (auto& v : mean) v /= count;

  MseDecomposition out;
  for (const auto& e : estimates) {
    double dev = 0.0, err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dm = e[i] - mean[i];
      const double dt = e[i] - truth[i];
      dev += dm * dm;
      err += dt * dt;
    }
    out.variance += gram_weight * dev;
    out.raw_mse += gram_weight * err;
  }
  out.variance /= count - 1.0;
  out.raw_mse /= count;
  double bias = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = mean[i] - truth[i];
    bias += d * d;
  }
  out.squared_bias = gram_weight * bias;
  return out;
}

}  // namespace fmlmc
