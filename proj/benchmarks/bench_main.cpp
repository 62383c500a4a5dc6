#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "fiberfield/meanfield/convolution.hpp"
#include "fiberfield/meanfield/kinetic_field.hpp"
#include "fiberfield/meanfield/transport.hpp"
#include "fiberfield/meanfield/velocity_step.hpp"
#include "fiberfield/micro/fiber_system.hpp"
#include "fiberfield/stationary/fixed_point.hpp"
#include "fiberfield/verify/wasserstein.hpp"

using namespace fiberfield;

namespace {

std::shared_ptr<const GeodesicGrid> sphere(int level) {
    return std::make_shared<const GeodesicGrid>(build_geodesic_grid(level));
}

InteractionPotential preset_U() { return InteractionPotential::smooth_heaviside(10.0, 1.4, 10.0); }

}  // namespace

static void BM_Transport(benchmark::State& state) {
    const SpatialGrid grid(3, static_cast<int>(state.range(0)), 7.0);
    auto f = box_initial_field(grid, sphere(1));
    for (auto _ : state) {
        auto report = transport_step(f, 0.05);
        benchmark::DoNotOptimize(report);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.values.size()));
}
BENCHMARK(BM_Transport)->Arg(11)->Arg(21)->Unit(benchmark::kMillisecond);

static void BM_VelocityHalfStep(benchmark::State& state) {
    const SpatialGrid grid(3, 21, 7.0);
    auto f = box_initial_field(grid, sphere(static_cast<int>(state.range(0))));
    std::vector<Vec3> g(grid.size());
    for (std::size_t p = 0; p < g.size(); ++p) g[p] = grid.point(p);
    VelocityStepOptions options;
    options.subcycle = true;
    for (auto _ : state) {
        auto report = velocity_halfstep(f, g, 1.0, 0.01, options);
        benchmark::DoNotOptimize(report);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.values.size()));
}
BENCHMARK(BM_VelocityHalfStep)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_Convolution(benchmark::State& state) {
    const SpatialGrid grid(3, static_cast<int>(state.range(0)), 7.0);
    const auto stencil = build_convolution_stencil(grid, preset_U(), 1e-3, ConvolutionKind::gradient);
    const auto rho = boltzmann_density(grid);
    for (auto _ : state) {
        auto out = convolve(stencil, rho.values);
        benchmark::DoNotOptimize(out.data());
    }
    state.counters["offsets"] = static_cast<double>(stencil.offsets.size());
}
BENCHMARK(BM_Convolution)->Arg(11)->Arg(21)->Unit(benchmark::kMillisecond);

static void BM_FixedPointStep(benchmark::State& state) {
    StationaryProblem prob;
    prob.grid = SpatialGrid(3, 21, 7.0);
    prob.U = preset_U();
    const PotentialConvolution conv(prob);
    const auto rho = boltzmann_density(prob.grid);
    for (auto _ : state) {
        auto next = fixed_point_step(rho, prob, conv);
        benchmark::DoNotOptimize(next.rho.values.data());
    }
}
BENCHMARK(BM_FixedPointStep)->Unit(benchmark::kMillisecond);

static void BM_Wasserstein(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(static_cast<std::size_t>(n) * 6), b(a.size());
    for (double& v : a) v = u(rng);
    for (double& v : b) v = u(rng);
    const EmpiricalMeasure mu(6, a), nu(6, b);
    for (auto _ : state) benchmark::DoNotOptimize(wasserstein1(mu, nu));
    state.SetComplexityN(n);
}
BENCHMARK(BM_Wasserstein)->RangeMultiplier(2)->Range(50, 400)->Complexity(benchmark::oNCubed)->Unit(benchmark::kMillisecond);

static void BM_MicroForces(benchmark::State& state) {
    MicroConfig cfg;
    cfg.N = static_cast<int>(state.range(0));
    cfg.dt = 0.01;
    cfg.U = preset_U();
    const auto states = box_initial_states(cfg, 0, cfg.total_fibers());
    HistoryBuffer buffer(cfg.kernel, cfg.stride, cfg.dt);
    for (auto _ : state) {
        auto forces = interaction_forces(0.0, states, buffer, *cfg.U, true);
        benchmark::DoNotOptimize(forces.data());
    }
    state.SetComplexityN(cfg.N);
}
BENCHMARK(BM_MicroForces)->Arg(100)->Arg(500)->Complexity(benchmark::oNSquared)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
