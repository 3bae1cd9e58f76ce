#include <doctest.h>

#include <stdexcept>

#include "fmlmc/grid.hpp"
#include "test_support.hpp"

using namespace fmlmc;

TEST_SUITE("grid") {

TEST_CASE("1d hierarchy enumerates coarse to fine by doubling") {
    auto h = build_hierarchy_1d(512, 6);
    REQUIRE(h.levels() == 6);
    CHECK(h.depth() == 5);
    CHECK(h.dim() == 1);
    CHECK(h.refinement_factor() == 2);
    const int expected[] = {16, 32, 64, 128, 256, 512};
    for (int l = 0; l < 6; ++l) {
        CHECK(h.level_1d(l).n == expected[l]);
        CHECK(h.cells(l) == expected[l]);
    }
    CHECK(h.gram_weight(5) == doctest::Approx(1.0 / 512).epsilon(1e-15));
    CHECK(h.gram_weight(0) == doctest::Approx(1.0 / 16).epsilon(1e-15));
}

TEST_CASE("1d single level hierarchy is allowed") {
    auto h = build_hierarchy_1d(512, 1);
    CHECK(h.levels() == 1);
    CHECK(h.depth() == 0);
    CHECK(h.cells(0) == 512);
}

TEST_CASE("1d odd coarsest level is allowed") {
    auto h = build_hierarchy_1d(12, 3);
    const int expected[] = {3, 6, 12};
    for (int l = 0; l < 3; ++l) CHECK(h.cells(l) == expected[l]);
    CHECK_THROWS_AS(build_hierarchy_1d(12, 4), std::invalid_argument);
}

TEST_CASE("1d coarsening below two cells is rejected") {
    CHECK_THROWS_AS(build_hierarchy_1d(8, 4), std::invalid_argument);
    CHECK_THROWS_AS(build_hierarchy_1d(1, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_hierarchy_1d(0, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_hierarchy_1d(512, 0), std::invalid_argument);
    CHECK_NOTHROW(build_hierarchy_1d(2, 1));
    CHECK_NOTHROW(build_hierarchy_1d(8, 3));
}

TEST_CASE("1d cell geometry") {
    Level1D lv{8};
    CHECK(lv.cell_width() == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(lv.cell_center(0) == doctest::Approx(0.0625).epsilon(1e-15));
    CHECK(lv.cell_center(7) == doctest::Approx(0.9375).epsilon(1e-15));
}

TEST_CASE("2d hierarchy keeps the 2:1 aspect and square cells") {
    auto h = build_hierarchy_2d(256, 128, 4);
    REQUIRE(h.levels() == 4);
    CHECK(h.depth() == 3);
    CHECK(h.dim() == 2);
    CHECK(h.refinement_factor() == 4);
    const int ex[] = {32, 64, 128, 256};
    const int ey[] = {16, 32, 64, 128};
    for (int l = 0; l < 4; ++l) {
        auto lv = h.level_2d(l);
        CHECK(lv.nx == ex[l]);
        CHECK(lv.ny == ey[l]);
        CHECK(lv.hx() == doctest::Approx(lv.hy()).epsilon(1e-15));
        CHECK(h.cells(l) == ex[l] * ey[l]);
    }
    CHECK(h.gram_weight(3) == doctest::Approx(2.0 / 32768).epsilon(1e-15));
}

TEST_CASE("2d hierarchy rejects wrong aspect and over-coarsening") {
    CHECK_THROWS_AS(build_hierarchy_2d(128, 128, 2), std::invalid_argument);
    CHECK_THROWS_AS(build_hierarchy_2d(8, 4, 3), std::invalid_argument);
    CHECK_NOTHROW(build_hierarchy_2d(8, 4, 2));
}

TEST_CASE("2d cell geometry and flat indexing") {
    Level2D lv{8, 4};
    CHECK(lv.cells() == 32);
    CHECK(lv.hx() == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(lv.hy() == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(lv.cell_center_x(0) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(lv.cell_center_y(3) == doctest::Approx(0.875).epsilon(1e-15));
}

TEST_CASE("weighted inner product and norm") {
    Field x = {1.0, 2.0};
    CHECK(gram_norm_squared(x, 0.5) == doctest::Approx(2.5).epsilon(1e-15));
    Field y = {3.0, -1.0};
    CHECK(gram_dot(x, y, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
}

}  // TEST_SUITE
