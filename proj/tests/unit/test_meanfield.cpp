#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "fiberfield/core/error.hpp"
#include "fiberfield/meanfield/checkpoint.hpp"
#include "fiberfield/meanfield/convolution.hpp"
#include "fiberfield/meanfield/kinetic_field.hpp"
#include "fiberfield/meanfield/solver.hpp"
#include "fiberfield/meanfield/transport.hpp"
#include "fiberfield/meanfield/velocity_step.hpp"

using namespace fiberfield;

namespace {

std::shared_ptr<const GeodesicGrid> sphere(int level) {
    return std::make_shared<const GeodesicGrid>(build_geodesic_grid(level));
}

DensityField gaussian(const SpatialGrid& g, double sigma) {
    DensityField rho(g);
    for (std::size_t p = 0; p < g.size(); ++p) rho.values[p] = std::exp(-norm2(g.point(p)) / (2 * sigma * sigma));
    const double m = rho.mass();
    for (double& v : rho.values) v /= m;
    return rho;
}

// Per-point spherical average distance; f is the only spatial point of interest.
double distance_to_average(const KineticField& f, std::size_t p) {
    const auto& gv = *f.grid_v;
    double mean = 0.0;
    for (std::size_t c = 0; c < f.cells(); ++c) mean += f.at(p, c) * gv.areas[c];
    mean /= 4 * std::numbers::pi;
    double s = 0.0;
    for (std::size_t c = 0; c < f.cells(); ++c) s += gv.areas[c] * std::pow(f.at(p, c) - mean, 2);
    return std::sqrt(s);
}

double weighted_sum(const KineticField& f, std::size_t p) {
    double s = 0.0;
    for (std::size_t c = 0; c < f.cells(); ++c) s += f.at(p, c) * f.grid_v->areas[c];
    return s;
}

}  // namespace

TEST(MomentDensity, ConstantZeroAndSingleCell) {
    const auto gv = sphere(1);
    const SpatialGrid gx(3, 3, 1.0);
    KineticField f(gx, gv);
    EXPECT_EQ(moment_density(f).max(), 0.0);
    for (double& v : f.values) v = 2.5;
    for (double v : moment_density(f).values) EXPECT_NEAR(v, 2.5, 1e-12);
    std::fill(f.values.begin(), f.values.end(), 0.0);
    f.at(4, 7) = 3.0;
    const auto rho = moment_density(f);
    EXPECT_NEAR(rho.values[4], 3.0 * gv->areas[7] / (4 * std::numbers::pi), 1e-15);
    EXPECT_NEAR(rho.mass(), f.mass(), 1e-15);
}

TEST(MomentDensity, BoxInitialConditionHasUnitMassAndUpperHemisphere) {
    const auto gv = sphere(2);
    const auto f = box_initial_field(SpatialGrid(3, 21, 7.0), gv);
    EXPECT_NEAR(f.mass(), 1.0, 1e-12);
    for (std::size_t c = 0; c < f.cells(); ++c)
        if (gv->midpoints[c].z < -0.2) EXPECT_EQ(f.at(f.grid_x.index(10, 10, 10), c), 0.0);
}

TEST(Convolution, DiscreteDeltaReproducesKernel) {
    const SpatialGrid g(3, 11, 3.0);
    const auto U = InteractionPotential::smooth_heaviside(10.0, 1.4, 10.0);
    const auto st = build_convolution_stencil(g, U, 0.0, ConvolutionKind::gradient);
    DensityField rho(g);
    const std::size_t origin = g.index(4, 6, 5);
    rho.values[origin] = 1.0 / g.cell_volume();
    const auto out = to_vectors(convolve(st, rho.values));
    for (std::size_t p = 0; p < g.size(); ++p) {
        const Vec3 expect = U.gradient(g.point(p) - g.point(origin));
        EXPECT_NEAR(out[p].x, expect.x, 1e-12);
        EXPECT_NEAR(out[p].y, expect.y, 1e-12);
        EXPECT_NEAR(out[p].z, expect.z, 1e-12);
    }
    const auto vst = build_convolution_stencil(g, U, 0.0, ConvolutionKind::value);
    const auto val = convolve(vst, rho.values);
    for (std::size_t p = 0; p < g.size(); ++p) EXPECT_NEAR(val[p], U.value(g.point(p) - g.point(origin)), 1e-12);
}

TEST(Convolution, EvenDensityGivesZeroForceAtOrigin) {
    const SpatialGrid g(3, 21, 7.0);
    const auto U = InteractionPotential::smooth_heaviside(10.0, 1.4, 10.0);
    const auto rho = gaussian(g, 1.5);
    const auto st = build_convolution_stencil(g, U, 1e-3, ConvolutionKind::gradient);
    const auto out = to_vectors(convolve(st, rho.values));
    const Vec3 f0 = out[g.index(10, 10, 10)];
    EXPECT_LT(norm(f0), 1e-12);
}

TEST(Convolution, ThresholdIsAccurateOnGaussian) {
    const SpatialGrid g(3, 21, 7.0);
    const auto U = InteractionPotential::smooth_heaviside(10.0, 1.4, 10.0);
    const auto rho = gaussian(g, 1.0);
    const auto cut = build_convolution_stencil(g, U, 1e-3, ConvolutionKind::gradient);
    const auto full = build_convolution_stencil(g, U, 0.0, ConvolutionKind::gradient);
    EXPECT_LT(cut.offsets.size(), full.offsets.size());
    const auto a = convolve(cut, rho.values);
    const auto b = convolve(full, rho.values);
    double diff = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        ref += b[i] * b[i];
    }
    EXPECT_LE(std::sqrt(diff / ref), 0.01);
}

TEST(Convolution, CacheRejectsDifferentSetup) {
    const SpatialGrid g(3, 11, 3.0);
    const auto U = InteractionPotential::smooth_heaviside(10.0, 1.4, 10.0);
    ForceFieldCache cache(build_convolution_stencil(g, U, 1e-3, ConvolutionKind::gradient), DelayKernel::infinite());
    const DensityField rho(g);
    EXPECT_NO_THROW(convolution_force(rho, U, 1e-3, cache));
    EXPECT_THROW(convolution_force(rho, U, 0.0, cache), MismatchError);
    EXPECT_THROW(convolution_force(rho, InteractionPotential::smooth_heaviside(5.0, 1.4, 10.0), 1e-3, cache),
                 MismatchError);
    EXPECT_THROW(convolution_force(DensityField(SpatialGrid(3, 9, 3.0)), U, 1e-3, cache), MismatchError);
}

TEST(ForceFieldCache, Averages) {
    const SpatialGrid g(3, 3, 1.0);
    const auto st = build_convolution_stencil(g, InteractionPotential{}, 0.0, ConvolutionKind::value);
    const std::vector<double> f1(g.size(), 1.0), f2(g.size(), 3.0);

    ForceFieldCache empty(st, DelayKernel::infinite());
    EXPECT_THROW(empty.average(0.0), InvalidStateError);

    ForceFieldCache inf(st, DelayKernel::infinite());
    inf.record_field(0.0, f1);
    inf.record_field(0.1, f2);
    for (double v : inf.average(0.1)) EXPECT_DOUBLE_EQ(v, 2.0);

    ForceFieldCache same(st, DelayKernel::finite(0.25));
    for (int n = 0; n < 10; ++n) same.record_field(0.1 * n, f2);
    for (double v : same.average(0.9)) EXPECT_DOUBLE_EQ(v, 3.0);

    ForceFieldCache now(st, DelayKernel::finite(0.0));
    now.record_field(0.0, f1);
    now.record_field(0.1, f2);
    for (double v : now.average(0.1)) EXPECT_DOUBLE_EQ(v, 3.0);

    // Window [0.2, 0.4] holds the fields recorded at 0.2, 0.3, 0.4.
    ForceFieldCache win(st, DelayKernel::finite(0.2));
    for (int n = 0; n <= 4; ++n) win.record_field(0.1 * n, std::vector<double>(g.size(), double(n)));
    for (double v : win.average(0.4)) EXPECT_NEAR(v, 3.0, 1e-14);
}

TEST(VelocityStep, ConstantFieldWithoutForceIsUnchanged) {
    const auto gv = sphere(2);
    KineticField f(SpatialGrid(3, 3, 1.0), gv);
    for (double& v : f.values) v = 0.7;
    const std::vector<Vec3> g(f.points(), Vec3{});
    velocity_halfstep(f, g, 1.0, 0.01);
    for (double v : f.values) EXPECT_NEAR(v, 0.7, 1e-14);
}

TEST(VelocityStep, ConservesPerPointMassUnderAnyForce) {
    const auto gv = sphere(2);
    KineticField f(SpatialGrid(3, 3, 1.0), gv);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0), w(-3.0, 3.0);
    for (double& v : f.values) v = u(rng);
    std::vector<Vec3> g(f.points());
    for (auto& x : g) x = {w(rng), w(rng), w(rng)};
    std::vector<double> before(f.points());
    for (std::size_t p = 0; p < f.points(); ++p) before[p] = weighted_sum(f, p);
    for (int n = 0; n < 5; ++n) velocity_halfstep(f, g, 1.0, 0.01);
    for (std::size_t p = 0; p < f.points(); ++p) EXPECT_NEAR(weighted_sum(f, p), before[p], 1e-12);
}

TEST(VelocityStep, DiffusionDecaysMonotonicallyToSphericalAverage) {
    const auto gv = sphere(2);
    KineticField f(SpatialGrid(3, 3, 1.0), gv);
    const std::size_t p = 13;
    f.at(p, 0) = 4 * std::numbers::pi / gv->areas[0];
    const std::vector<Vec3> g(f.points(), Vec3{});
    const double dt = 0.9 * 2.0 / (0.5 * diffusion_factor(*gv));
    double prev = distance_to_average(f, p);
    const double start = prev;
    // Each call advances dt / 2.
    for (double t = 0.0; t < 20.0; t += dt / 2) {
        velocity_halfstep(f, g, 1.0, dt);
        const double d = distance_to_average(f, p);
        EXPECT_LE(d, prev * (1 + 1e-12));
        prev = d;
    }
    EXPECT_LT(prev, 1e-6 * start);
    EXPECT_GE(f.min(), 0.0);
}

TEST(VelocityStep, CflViolationsAreNamed) {
    const auto gv = sphere(2);
    KineticField f(SpatialGrid(3, 3, 1.0), gv);
    for (double& v : f.values) v = 1.0;
    const std::vector<Vec3> zero(f.points(), Vec3{});
    const double limit = 2.0 / (0.5 * diffusion_factor(*gv));
    try {
        velocity_halfstep(f, zero, 1.0, 1.5 * limit);
        FAIL() << "expected CflError";
    } catch (const CflError& e) {
        EXPECT_NE(std::string(e.what()).find("diffusion"), std::string::npos);
    }
    const std::vector<Vec3> strong(f.points(), Vec3{1000.0, 0.0, 0.0});
    try {
        velocity_halfstep(f, strong, 0.0, 0.01);
        FAIL() << "expected CflError";
    } catch (const CflError& e) {
        EXPECT_NE(std::string(e.what()).find("advection"), std::string::npos);
    }
    KineticField g = f;
    EXPECT_NO_THROW(velocity_halfstep(g, strong, 0.0, 0.01, {true, 0.5}));
    EXPECT_GT(velocity_halfstep(g, strong, 0.0, 0.01, {true, 0.5}).max_substeps, 1);
}

TEST(Bezier, CornerAndPolynomialReproduction) {
    BezierStencil s{};
    auto fill = [&](auto fn) {
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                for (int c = 0; c < 4; ++c) s[a * 16 + b * 4 + c] = fn(a - 1.0, b - 1.0, c - 1.0);
    };
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    fill([&](double, double, double) { return u(rng); });
    EXPECT_DOUBLE_EQ(bezier_interpolate(s, {0, 0, 0}, false), s[1 * 16 + 1 * 4 + 1]);
    EXPECT_DOUBLE_EQ(bezier_interpolate(s, {0, 0, 0}, true), s[1 * 16 + 1 * 4 + 1]);

    auto trilinear = [](double x, double y, double z) { return 1 + 2 * x - y + 0.5 * z + x * y - 3 * y * z + x * y * z; };
    fill(trilinear);
    for (int i = 0; i < 50; ++i) {
        const Vec3 xi{u(rng), u(rng), u(rng)};
        EXPECT_NEAR(bezier_interpolate(s, xi, false), trilinear(xi.x, xi.y, xi.z), 1e-12);
    }
    auto cubic = [](double x, double y, double z) {
        return 0.3 * x * x * x - y * y * z + 2 * x * y * y + z * z * z - 0.7 * x * x * y * z * z * y + 1.0;
    };
    fill(cubic);
    for (int i = 0; i < 50; ++i) {
        const Vec3 xi{u(rng), u(rng), u(rng)};
        EXPECT_NEAR(bezier_interpolate(s, xi, false), cubic(xi.x, xi.y, xi.z), 1e-12);
    }
}

TEST(Bezier, LimitingStaysInStencilRange) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::exponential_distribution<double> spike(1.0);
    for (int trial = 0; trial < 10000; ++trial) {
        BezierStencil s;
        for (double& v : s) v = trial % 2 ? u(rng) : (u(rng) < 0.1 ? spike(rng) * 10 : 0.0);
        const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
        const Vec3 xi{u(rng), u(rng), u(rng)};
        const double v = bezier_interpolate(s, xi, true);
        ASSERT_GE(v, *lo - 1e-14);
        ASSERT_LE(v, *hi + 1e-14);
    }
}

TEST(Transport, ConstantFieldAndZeroStep) {
    const auto gv = sphere(0);
    const SpatialGrid gx(3, 9, 2.0);
    KineticField f(gx, gv);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& v : f.values) v = u(rng);
    KineticField same = f;
    transport_step(same, 0.0);
    for (std::size_t i = 0; i < f.values.size(); ++i) EXPECT_NEAR(same.values[i], f.values[i], 1e-14);

    // A constant interior stays constant where the back-traced stencil avoids the
    // boundary, up to the global repair of the mass lost through the boundary.
    for (double& v : f.values) v = 1.5;
    const double factor = transport_step(f, 0.1, {true, 1.0}).repair_factor;
    for (int i = 2; i < 7; ++i)
        for (int j = 2; j < 7; ++j)
            for (int k = 2; k < 7; ++k)
                for (std::size_t c = 0; c < f.cells(); ++c) EXPECT_NEAR(f.at(gx.index(i, j, k), c), 1.5 * factor, 1e-12);
}

TEST(Transport, BezierSlabMatchesPointwiseReference) {
    const auto gv = sphere(0);
    const SpatialGrid gx(3, 7, 2.0);
    KineticField f(gx, gv);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& v : f.values) v = u(rng);
    KineticField g = f;
    const double dt = 0.37;
    const auto report = transport_step(g, dt);
    const int n = gx.n;
    auto value = [&](std::size_t c, int i, int j, int k) {
        if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n) return 0.0;
        return f.at(gx.index(i, j, k), c);
    };
    for (std::size_t c = 0; c < f.cells(); ++c) {
        const Vec3 shift = -dt / gx.dx() * gv->midpoints[c];
        const double s[3] = {shift.x, shift.y, shift.z};
        int base[3];
        double xi[3];
        for (int a = 0; a < 3; ++a) {
            base[a] = static_cast<int>(std::floor(s[a]));
            xi[a] = s[a] - base[a];
        }
        for (std::size_t p = 0; p < gx.size(); ++p) {
            const auto ijk = gx.multi_index(p);
            BezierStencil st;
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    for (int d = 0; d < 4; ++d)
                        st[a * 16 + b * 4 + d] =
                            value(c, ijk[0] + base[0] + a - 1, ijk[1] + base[1] + b - 1, ijk[2] + base[2] + d - 1);
            const double expect = report.repair_factor * bezier_interpolate(st, {xi[0], xi[1], xi[2]}, true);
            ASSERT_NEAR(g.at(p, c), expect, 1e-13);
        }
    }
}

TEST(Transport, GaussianIsTranslatedWithSecondOrderError) {
    const auto gv = sphere(0);
    const std::size_t cell = 3;
    const Vec3 tau = gv->midpoints[cell];
    auto error_for = [&](int n) {
        const SpatialGrid gx(3, n, 4.0);
        KineticField f(gx, gv);
        for (std::size_t p = 0; p < gx.size(); ++p) f.at(p, cell) = std::exp(-norm2(gx.point(p)));
        const double dt = 0.05;
        for (int s = 0; s < 10; ++s) transport_step(f, dt);
        double err = 0.0;
        for (std::size_t p = 0; p < gx.size(); ++p)
            err += std::pow(f.at(p, cell) - std::exp(-norm2(gx.point(p) - 10 * dt * tau)), 2) * gx.cell_volume();
        return std::sqrt(err);
    };
    const double coarse = error_for(21);
    const double fine = error_for(41);
    EXPECT_LT(coarse, 0.05);
    EXPECT_GT(std::log2(coarse / fine), 1.8);
}

TEST(Transport, RepairRestoresMass) {
    const auto gv = sphere(1);
    KineticField f(SpatialGrid(3, 5, 1.0), gv);
    for (double& v : f.values) v = 1.0;
    const double m = f.mass();
    EXPECT_DOUBLE_EQ(conservation_repair(f, m), 1.0);
    for (double& v : f.values) v *= 0.5;
    EXPECT_NEAR(conservation_repair(f, m), 2.0, 1e-14);
    for (double v : f.values) EXPECT_NEAR(v, 1.0, 1e-14);
    for (double& v : f.values) v = 0.0;
    EXPECT_THROW(conservation_repair(f, m), InvalidStateError);

    auto box = box_initial_field(SpatialGrid(3, 21, 7.0), sphere(1));
    const auto report = transport_step(box, 0.1);
    EXPECT_NEAR(box.mass(), 1.0, 1e-12);
    EXPECT_FALSE(report.leakage_warning);
}

TEST(Transport, LeakageIsFlagged) {
    const auto gv = sphere(0);
    const SpatialGrid gx(3, 7, 1.0);
    KineticField f(gx, gv);
    for (double& v : f.values) v = 1.0;
    EXPECT_TRUE(transport_step(f, 0.05).leakage_warning);
}

TEST(Strang, ZeroStepIsIdentity) {
    MeanFieldConfig cfg;
    cfg.grid = SpatialGrid(3, 7, 2.0);
    cfg.level = 0;
    auto f = box_initial_field(cfg.grid, sphere(0));
    const auto before = f.values;
    strang_step(f, 0.0, cfg, nullptr);
    EXPECT_EQ(f.values, before);
}

TEST(Strang, ThousandStepsConserveMassAndPositivity) {
    MeanFieldConfig cfg;
    cfg.grid = SpatialGrid(3, 13, 5.0);
    cfg.level = 1;
    cfg.U = InteractionPotential::smooth_heaviside(10.0, 1.4, 10.0);
    cfg.kernel = DelayKernel::infinite();
    MeanFieldSolver solver(cfg, box_initial_field(cfg.grid, sphere(1)));
    double worst_mass = 0.0, worst_min = 0.0;
    for (int n = 0; n < 1000; ++n) {
        solver.step();
        worst_mass = std::max(worst_mass, std::abs(solver.field().mass() - 1.0));
        worst_min = std::min(worst_min, solver.field().min());
    }
    EXPECT_LE(worst_mass, 1e-10);
    EXPECT_GE(worst_min, -1e-10);
}

TEST(Strang, NonInteractingDensityApproachesBoltzmann) {
    MeanFieldConfig cfg;
    cfg.grid = SpatialGrid(3, 15, 5.0);
    cfg.level = 1;
    MeanFieldSolver solver(cfg, box_initial_field(cfg.grid, sphere(1)));
    const auto target = boltzmann_density(cfg.grid);
    std::vector<double> series;
    // Stop before the distance reaches the discretisation floor of the grid.
    solver.advance_to(8.0, [&](const MeanFieldSolver& s) { series.push_back(l2_distance(s.density(), target)); });
    EXPECT_LT(series.back(), 0.1 * series.front());
    for (std::size_t i = 0; i + 1 < series.size(); ++i) EXPECT_LE(series[i + 1], series[i] * (1 + 1e-9));
}

TEST(Checkpoint, RoundTripsKineticAndDensity) {
    const auto dir = std::filesystem::temp_directory_path() / "fiberfield_test_checkpoint";
    std::filesystem::create_directories(dir);
    auto f = box_initial_field(SpatialGrid(3, 7, 2.0), sphere(1));
    f.time = 1.25;
    write_kinetic_checkpoint(dir / "f.ffk", f);
    const auto g = read_kinetic_checkpoint(dir / "f.ffk");
    EXPECT_EQ(g.grid_x, f.grid_x);
    EXPECT_EQ(g.grid_v->level, 1);
    EXPECT_EQ(g.time, 1.25);
    EXPECT_EQ(g.values, f.values);

    const auto rho = gaussian(SpatialGrid(3, 9, 3.0), 1.0);
    write_density_checkpoint(dir / "r.ffd", rho);
    const auto r = read_density_checkpoint(dir / "r.ffd");
    EXPECT_EQ(r.grid, rho.grid);
    EXPECT_EQ(r.values, rho.values);

    std::ofstream(dir / "bad.ffk") << "garbage";
    EXPECT_THROW(read_kinetic_checkpoint(dir / "bad.ffk"), Error);
    EXPECT_THROW(read_density_checkpoint(dir / "missing.ffd"), Error);
    std::filesystem::remove_all(dir);
}
