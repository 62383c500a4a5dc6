#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "fiberfield/sphere/geodesic_grid.hpp"

using namespace fiberfield;

TEST(GeodesicGrid, CellCounts) {
    for (int level = 0; level <= 4; ++level)
        EXPECT_EQ(build_geodesic_grid(level).cell_count(), 20u * (1u << (2 * level)));
}

TEST(GeodesicGrid, PrintedMeanDistance) {
    EXPECT_NEAR(build_geodesic_grid(2).mean_midpoint_distance(), 0.175, 0.005);
}

TEST(GeodesicGrid, InvariantsHoldAtLevelsZeroToFour) {
    for (int level = 0; level <= 4; ++level) {
        const auto d = validate_grid(build_geodesic_grid(level));
        EXPECT_LT(d.area_sum_error, 1e-9) << level;
        EXPECT_LT(d.max_unit_error, 1e-12) << level;
        EXPECT_LT(d.max_normal_tangency, 1e-12) << level;
        EXPECT_LT(d.max_normal_unit_error, 1e-12) << level;
        EXPECT_LT(d.max_antisymmetry, 1e-12) << level;
        EXPECT_EQ(d.max_orientation_violation, 0.0) << level;
        EXPECT_LT(d.max_equidistance_error, 1e-12) << level;
        EXPECT_EQ(d.bad_edge_sharing, 0u) << level;
        EXPECT_LT(d.worst_invariant_violation(), 1e-9) << level;
    }
}

TEST(GeodesicGrid, TangentialClosureRegression) {
    // Icosahedron faces are regular, so the closure vanishes up to rounding.
    EXPECT_LT(validate_grid(build_geodesic_grid(0)).max_closure_relative, 1e-2);
    for (int level = 1; level <= 3; ++level)
        EXPECT_LT(validate_grid(build_geodesic_grid(level)).max_closure_relative, 5e-2) << level;
}

TEST(GeodesicGrid, FlippedNormalIsReported) {
    auto g = build_geodesic_grid(1);
    g.sides[7][1].outward_normal = -g.sides[7][1].outward_normal;
    const auto d = validate_grid(g);
    EXPECT_GT(d.max_antisymmetry, 1.0);
    EXPECT_GT(d.max_orientation_violation, 0.0);
}

TEST(GeodesicGrid, RefinementHalvesSpacing) {
    double prev = validate_grid(build_geodesic_grid(0)).max_distance;
    for (int level = 1; level <= 4; ++level) {
        const double now = validate_grid(build_geodesic_grid(level)).max_distance;
        EXPECT_GE(now / prev, 0.45) << level;
        EXPECT_LE(now / prev, 0.55) << level;
        prev = now;
    }
}

TEST(GeodesicGrid, CrossingSplitsNearHalf) {
    for (int level = 0; level <= 3; ++level) {
        const auto g = build_geodesic_grid(level);
        EXPECT_GE(validate_grid(g).min_part_ratio, 0.3) << level;
        for (const auto& e : g.edges) EXPECT_NEAR(e.part_i + e.part_j, e.distance, 1e-12);
    }
}

TEST(GeodesicGrid, LaplaceBeltramiOnFirstHarmonic) {
    double prev_err = 1e300;
    for (int level = 1; level <= 4; ++level) {
        const auto g = build_geodesic_grid(level);
        std::vector<double> f(g.cell_count());
        for (std::size_t c = 0; c < f.size(); ++c) f[c] = g.midpoints[c].z;
        const auto lap = laplace_beltrami(g, f);
        double err = 0.0;
        for (std::size_t c = 0; c < f.size(); ++c) err += g.areas[c] * std::pow(lap[c] + 2.0 * f[c], 2);
        err = std::sqrt(err);
        EXPECT_LT(err, prev_err) << level;
        prev_err = err;
    }
    // Pointwise truncation error stays O(1) on triangles; the L2 error decays slowly.
    EXPECT_LT(prev_err, 0.13);
}

TEST(GeodesicGrid, HemisphereFractions) {
    const auto g = build_geodesic_grid(2);
    const auto frac = upper_hemisphere_fraction(g);
    double area = 0.0;
    for (std::size_t c = 0; c < frac.size(); ++c) {
        EXPECT_GE(frac[c], 0.0);
        EXPECT_LE(frac[c], 1.0);
        area += frac[c] * g.areas[c];
    }
    EXPECT_NEAR(area, 2 * std::numbers::pi, 0.02);
}

TEST(GeodesicGrid, CsvDumpHasHeaders) {
    std::ostringstream cells, edges;
    write_grid_csv(build_geodesic_grid(0), cells, edges);
    EXPECT_EQ(cells.str().substr(0, 24), "cell,tau1,tau2,tau3,area");
    const std::string text = edges.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 31);
}
