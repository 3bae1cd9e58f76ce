#include <doctest.h>

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>

#include "fmlmc/diffusion.hpp"
#include "fmlmc/errors.hpp"
#include "fmlmc/grid.hpp"
#include "fmlmc/hartley.hpp"
#include "support/dense.hpp"
#include "test_support.hpp"

using namespace fmlmc;
using namespace fmlmc::testsupport;

namespace {

DiffusivityField2D constant_lengthscales(const Level2D& lv, double d) {
    DiffusivityField2D f;
    f.level = lv;
    f.d11.assign(static_cast<std::size_t>(lv.cells()), d);
    f.d22.assign(static_cast<std::size_t>(lv.cells()), d);
    return f;
}

Simulator2D make_sim_2d(const Level2D& lv, double d, SimulatorKind kind = SimulatorKind::LinearField,
                        LinearSolveConfig solver = LinearSolveConfig::cg()) {
    return Simulator2D(DiffusionParams2D{constant_lengthscales(lv, d), 10}, kind, solver);
}

// Independent dense 5-point assembly of the divergence-form operator.
Matrix dense_laplacian_2d(const DiffusivityField2D& k, const Level2D& lv) {
    const int nx = lv.nx, ny = lv.ny;
    const double ix2 = 1.0 / (lv.hx() * lv.hx());
    const double iy2 = 1.0 / (lv.hy() * lv.hy());
    Matrix m(lv.cells(), lv.cells());
    auto idx = [&](int i, int j) { return ((j + ny) % ny) * nx + (i + nx) % nx; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int c = idx(i, j);
            const double kw = k.d11[static_cast<std::size_t>(idx(i, j))];
            const double ke = k.d11[static_cast<std::size_t>(idx(i + 1, j))];
            const double ks = k.d22[static_cast<std::size_t>(idx(i, j))];
            const double kn = k.d22[static_cast<std::size_t>(idx(i, j + 1))];
            m(c, idx(i - 1, j)) += kw * ix2;
            m(c, idx(i + 1, j)) += ke * ix2;
            m(c, idx(i, j - 1)) += ks * iy2;
            m(c, idx(i, j + 1)) += kn * iy2;
            m(c, c) += -(kw + ke) * ix2 - (ks + kn) * iy2;
        }
    return m;
}

}  // namespace

TEST_SUITE("diffusion") {

TEST_CASE("1d laplacian annihilates constants and maps spectral modes") {
    Level1D lv{16};
    const double k = 0.05;
    Field ones(16, 1.0);
    auto z = apply_laplacian(ones, k, lv);
    for (double v : z) CHECK(std::abs(v) < 1e-12);

    const double c = k * 16.0 * 16.0;
    for (int mode : {1, 5, 8, 15}) {
        auto h = hartley_column(16, mode);
        auto lap = apply_laplacian(h, k, lv);
        const double s = std::sin(mode * std::numbers::pi / 16.0);
        const double lambda = -4.0 * c * s * s;
        for (std::size_t i = 0; i < h.size(); ++i)
            CHECK(lap[i] == doctest::Approx(lambda * h[i]).epsilon(1e-10).scale(std::abs(lambda) + 1.0));
    }
}

TEST_CASE("1d shifted operator is a symmetric circulant and SPD") {
    Level1D lv{16};
    const double k = 0.06 * 0.06 / 17.0;
    auto shifted = assemble(16, 16, [&](std::span<const double> u) {
        auto lap = apply_laplacian(u, k, lv);
        Field out(u.begin(), u.end());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] -= lap[i];
        return out;
    });
    Field col0(16);
    for (int i = 0; i < 16; ++i) col0[static_cast<std::size_t>(i)] = shifted(i, 0);
    CHECK(max_abs(subtract(shifted, circulant(col0))) < 1e-12);
    // W (I - Lap) is SPD (W is a positive scalar, so the shifted operator is).
    CHECK(is_spd(shifted));

    // Hartley conjugation leaves only diagonal energy.
    HartleyTransform t(16);
    Matrix h(16, 16);
    for (int j = 0; j < 16; ++j)
        for (int m = 0; m < 16; ++m) h(j, m) = t.entry(j, m);
    auto b = matmul(transpose(h), matmul(shifted, h));
    double off = 0.0, diag = 0.0;
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) (i == j ? diag : off) += b(i, j) * b(i, j);
    CHECK(off <= 1e-9 * diag);
}

TEST_CASE("2d laplacian matches an independent dense assembly") {
    Level2D lv{4, 2};
    auto ls = constant_lengthscales(lv, 1.0);
    auto k = diffusion_coefficients(ls, 10);  // K = 1/16 on every edge
    for (double v : k.d11) CHECK(v == doctest::Approx(1.0 / 16).epsilon(1e-15));

    auto op = assemble(lv.cells(), lv.cells(),
                       [&](std::span<const double> u) { return apply_laplacian(u, k, lv); });
    CHECK(max_abs(subtract(op, dense_laplacian_2d(k, lv))) < 1e-12);

    Field ones(static_cast<std::size_t>(lv.cells()), 1.0);
    for (double v : apply_laplacian(ones, k, lv)) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("2d heterogeneous operator: dense oracle and SPD shift") {
    Level2D lv{8, 4};
    GrfParams grf{0.3, 0.06, 0.25, 77};
    auto ls = sample_lengthscale_fields(grf, lv);
    auto k = diffusion_coefficients(ls, 10);
    auto op = assemble(lv.cells(), lv.cells(),
                       [&](std::span<const double> u) { return apply_laplacian(u, k, lv); });
    CHECK(max_abs(subtract(op, dense_laplacian_2d(k, lv))) < 1e-12);

    auto shifted = subtract(Matrix::identity(lv.cells()), op);
    CHECK(is_spd(shifted));
}

TEST_CASE("apply_factor reduces to W^{-1} when the lengthscale vanishes") {
    Level1D lv{16};
    Simulator1D sim({0.0, 10, lv}, SimulatorKind::LinearField);
    auto x = random_field(16, derive_stream(31u, 1));
    auto y = sim.apply_factor(x);
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(y[i] == doctest::Approx(16.0 * x[i]).epsilon(1e-13));
}

TEST_CASE("1d apply_factor matches the dense inverse power") {
    Level1D lv{16};
    DiffusionParams1D params{0.06, 10, lv};
    Simulator1D sim(params, SimulatorKind::LinearField);

    const double k = params.diffusion_coefficient();
    auto shifted = assemble(16, 16, [&](std::span<const double> u) {
        auto lap = apply_laplacian(u, k, lv);
        Field out(u.begin(), u.end());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] -= lap[i];
        return out;
    });
    auto dense_a = scale(matrix_power(inverse(shifted), params.q()), 16.0);  // (I-Lap)^{-q} W^{-1}
    auto got = assemble(16, 16, [&](std::span<const double> x) { return sim.apply_factor(x); });
    CHECK(max_abs(subtract(got, dense_a)) < 1e-9 * max_abs(dense_a));

    // Columns of the Hartley basis are eigenvectors of A.
    auto h3 = hartley_column(16, 3);
    auto ah3 = sim.apply_factor(h3);
    const double ratio = ah3[0] / h3[0];
    for (std::size_t i = 0; i < h3.size(); ++i)
        CHECK(ah3[i] == doctest::Approx(ratio * h3[i]).epsilon(1e-10));
}

TEST_CASE("1d solves are linear and exact for random right-hand sides") {
    for (int n : {2, 3, 5, 16, 33}) {
        Level1D lv{n};
        DiffusionParams1D params{0.08, 6, lv};
        Simulator1D sim(params, SimulatorKind::LinearField);
        const double k = params.diffusion_coefficient();
        auto rhs = random_field(static_cast<std::size_t>(n), derive_stream(33u, static_cast<std::uint64_t>(n)));
        auto y = sim.solve_helmholtz(rhs);
        auto lap = apply_laplacian(y, k, lv);
        for (int i = 0; i < n; ++i) {
            const auto u = static_cast<std::size_t>(i);
            CHECK(y[u] - lap[u] == doctest::Approx(rhs[u]).epsilon(1e-11));
        }

        auto x2 = random_field(static_cast<std::size_t>(n), derive_stream(33u, 7, static_cast<std::uint64_t>(n)));
        auto lhs = sim.apply_factor(axpby_field(2.0, rhs, -0.5, x2));
        auto r1 = sim.apply_factor(rhs);
        auto r2 = sim.apply_factor(x2);
        for (int i = 0; i < n; ++i) {
            const auto u = static_cast<std::size_t>(i);
            CHECK(lhs[u] == doctest::Approx(2.0 * r1[u] - 0.5 * r2[u]).epsilon(1e-10));
        }
    }
}

TEST_CASE("2d apply_factor agrees with the dense inverse power") {
    Level2D lv{8, 4};
    auto sim = make_sim_2d(lv, 0.4);
    auto k = sim.diffusion();
    auto shifted = subtract(Matrix::identity(lv.cells()), dense_laplacian_2d(k, lv));
    const double inv_w = lv.cells() / 2.0;
    auto dense_a = scale(matrix_power(inverse(shifted), 5), inv_w);
    auto got =
        assemble(lv.cells(), lv.cells(), [&](std::span<const double> x) { return sim.apply_factor(x); });
    CHECK(max_abs(subtract(got, dense_a)) < 1e-9 * max_abs(dense_a));
}

TEST_CASE("conjugate gradient reports achieved residual when starved") {
    Level2D lv{16, 8};
    LinearSolveConfig starving{SolveMethod::ConjugateGradient, 1e-10, 2};
    auto sim = make_sim_2d(lv, 0.8, SimulatorKind::LinearField, starving);
    auto rhs = random_field(static_cast<std::size_t>(lv.cells()), derive_stream(35u, 1));
    CHECK_THROWS_AS((void)sim.solve_helmholtz(rhs), SolverError);
    try {
        (void)sim.solve_helmholtz(rhs);
    } catch (const SolverError& e) {
        CHECK(e.achieved_residual > 1e-10);
        CHECK(std::string(e.what()).find("residual") != std::string::npos);
    }
}

TEST_CASE("simulator kinds: linear is the factor, squared is its square") {
    Level1D lv{32};
    Simulator1D lin({0.05, 10, lv}, SimulatorKind::LinearField);
    Simulator1D sq({0.05, 10, lv}, SimulatorKind::SquaredField);
    auto x = random_field(32, derive_stream(37u, 1));
    auto a = lin.apply(x);
    auto b = sq.apply(x);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(b[i] == doctest::Approx(a[i] * a[i]).epsilon(1e-12));
        CHECK(b[i] >= 0.0);
    }
    Field zero(32, 0.0);
    for (double v : sq.apply(zero)) CHECK(v == 0.0);
}

TEST_CASE("parameter validation") {
    Level1D lv{16};
    CHECK_THROWS_AS(Simulator1D({0.05, 7, lv}, SimulatorKind::LinearField), std::invalid_argument);
    CHECK_THROWS_AS(Simulator1D({0.05, 0, lv}, SimulatorKind::LinearField), std::invalid_argument);
    CHECK_THROWS_AS(Simulator1D({0.05, 10, lv}, SimulatorKind::LinearField, LinearSolveConfig::cg()),
                    std::invalid_argument);
    Level2D lv2{4, 2};
    CHECK_THROWS_AS(make_sim_2d(lv2, 0.4, SimulatorKind::LinearField, LinearSolveConfig::direct()),
                    std::invalid_argument);
    auto bad = constant_lengthscales(lv2, 1.0);
    bad.d11[3] = 0.0;
    CHECK_THROWS_AS(diffusion_coefficients(bad, 10), std::invalid_argument);
    CHECK_THROWS_AS(diffusion_coefficients(constant_lengthscales(lv2, 1.0), 2), std::invalid_argument);
}

TEST_CASE("input sampling: covariance, mean, determinism") {
    const std::size_t n = 8;
    const double w = 1.0 / 8;
    RandomStream rng(derive_stream(39u, 1));
    const int draws = 100000;
    Field mean(n, 0.0);
    Matrix cov(8, 8);
    for (int s = 0; s < draws; ++s) {
        auto x = sample_input(n, w, rng);
        for (std::size_t i = 0; i < n; ++i) {
            mean[i] += x[i];
            for (std::size_t j = 0; j < n; ++j) cov(static_cast<int>(i), static_cast<int>(j)) += x[i] * x[j];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(mean[i] / draws) < 3.0 * std::sqrt(w / draws));
        for (std::size_t j = 0; j < n; ++j) {
            const double c = cov(static_cast<int>(i), static_cast<int>(j)) / draws;
            if (i == j)
                CHECK(std::abs(c - w) < 0.05 * w);
            else
                CHECK(std::abs(c) < 0.05 * w);
        }
    }

    RandomStream r1(derive_stream(39u, 2));
    RandomStream r2(derive_stream(39u, 2));
    CHECK(sample_input(n, w, r1) == sample_input(n, w, r2));
}

TEST_CASE("lengthscale field sampling") {
    Level2D lv{64, 32};
    GrfParams frozen{0.12, 0.0, 0.05, 5};
    auto f = sample_lengthscale_fields(frozen, lv);
    for (double v : f.d11) CHECK(v == doctest::Approx(0.12).epsilon(1e-14));
    for (double v : f.d22) CHECK(v == doctest::Approx(0.12).epsilon(1e-14));

    GrfParams params{0.12, 0.12 / 5, 0.04, 11};
    auto g = sample_lengthscale_fields(params, lv);
    CHECK(g.d11 != g.d22);
    auto repeat = sample_lengthscale_fields(params, lv);
    CHECK(g.d11 == repeat.d11);
    CHECK(g.d22 == repeat.d22);
    for (double v : g.d11) CHECK(v >= 0.012);

    // A big realization reproduces the nominal variance as a spatial average.
    Level2D big{256, 128};
    GrfParams bp{0.02, 0.004, 0.04, 23};
    auto h = sample_lengthscale_fields(bp, big);
    double s = 0.0, s2 = 0.0;
    for (double v : h.d11) {
        s += v;
        s2 += v * v;
    }
    const double cnt = static_cast<double>(h.d11.size());
    const double var = s2 / cnt - (s / cnt) * (s / cnt);
    CHECK(std::abs(var - bp.stddev * bp.stddev) < 0.25 * bp.stddev * bp.stddev);
}

TEST_CASE("lengthscale restriction averages along the edge direction") {
    Level2D fine{8, 4};
    auto c = constant_lengthscales(fine, 0.7);
    auto rc = restrict_lengthscale(c);
    CHECK(rc.level.nx == 4);
    CHECK(rc.level.ny == 2);
    for (double v : rc.d11) CHECK(v == doctest::Approx(0.7).epsilon(1e-15));
    for (double v : rc.d22) CHECK(v == doctest::Approx(0.7).epsilon(1e-15));

    // d11 lives at x = i*hx and averages along y; d22 at y = j*hy along x.
    DiffusivityField2D f;
    f.level = fine;
    f.d11.resize(32);
    f.d22.resize(32);
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 8; ++i) {
            f.d11[static_cast<std::size_t>(j) * 8 + i] = 1.0 + (j + 0.5) * fine.hy();  // linear in y
            f.d22[static_cast<std::size_t>(j) * 8 + i] = 2.0 + (i + 0.5) * fine.hx();  // linear in x
        }
    auto r = restrict_lengthscale(f);
    Level2D coarse{4, 2};
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 4; ++i) {
            // Coarse midpoints of the same linear profiles.
            CHECK(r.d11[static_cast<std::size_t>(j) * 4 + i] ==
                  doctest::Approx(1.0 + (j + 0.5) * coarse.hy()).epsilon(1e-14));
            CHECK(r.d22[static_cast<std::size_t>(j) * 4 + i] ==
                  doctest::Approx(2.0 + (i + 0.5) * coarse.hx()).epsilon(1e-14));
        }

    CHECK_THROWS_AS(restrict_lengthscale(r), std::invalid_argument);
}

TEST_CASE("exact covariance diagonal") {
    Level1D lv{16};
    DiffusionParams1D params{0.06, 10, lv};
    Simulator1D sim(params, SimulatorKind::LinearField);
    auto theta = exact_theta(sim);
    REQUIRE(theta.size() == 16);
    // Constant-coefficient periodic operator: constant diagonal.
    for (double v : theta) CHECK(v == doctest::Approx(theta[0]).epsilon(1e-9));
    for (double v : theta) CHECK(v > 0.0);

    // Dense check: theta == diag(A W A') (the covariance factorization).
    auto a = assemble(16, 16, [&](std::span<const double> x) { return sim.apply_factor(x); });
    auto l = scale(matmul(a, transpose(a)), 1.0 / 16);  // A W A' with W = I/16
    for (int i = 0; i < 16; ++i)
        CHECK(theta[static_cast<std::size_t>(i)] == doctest::Approx(l(i, i)).epsilon(1e-10));

    CHECK_THROWS_AS(exact_theta(sim, 8), std::invalid_argument);
}

TEST_CASE("exact covariance diagonal matches a Monte Carlo estimate") {
    Level1D lv{32};
    Simulator1D sim({0.06, 10, lv}, SimulatorKind::LinearField);
    auto theta = exact_theta(sim);
    const int draws = 100000;
    RandomStream rng(derive_stream(41u, 9));
    Field s(32, 0.0), s2(32, 0.0);
    for (int d = 0; d < draws; ++d) {
        auto x = sample_input(32, 1.0 / 32, rng);
        auto y = sim.apply_factor(x);
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double v = y[i] * y[i];
            s[i] += v;
            s2[i] += v * v;
        }
    }
    for (std::size_t i = 0; i < 32; ++i) {
        const double mean = s[i] / draws;
        const double var = s2[i] / draws - mean * mean;
        const double se = std::sqrt(var / draws);
        CHECK(std::abs(mean - theta[i]) < 3.0 * se);
    }
}

TEST_CASE("normalization coefficients") {
    Field ones(4, 1.0);
    auto g1 = normalization_coefficients(ones);
    for (double v : g1) CHECK(v == 1.0);
    Field fours(4, 4.0);
    auto g2 = normalization_coefficients(fours);
    for (double v : g2) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
    Field bad = {1.0, 0.0, 2.0};
    CHECK_THROWS_AS(normalization_coefficients(bad), std::invalid_argument);
}

}  // TEST_SUITE
