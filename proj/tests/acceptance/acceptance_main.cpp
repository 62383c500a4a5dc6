// Acceptance gate: runs each criterion at its stated tolerance and prints one
// PASS/FAIL line per criterion. Arguments select a subset (e.g. "2 7 8").

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "fiberfield/harness/io.hpp"
#include "fiberfield/harness/run.hpp"
#include "fiberfield/meanfield/solver.hpp"
#include "fiberfield/micro/fiber_system.hpp"
#include "fiberfield/micro/histogram.hpp"
#include "fiberfield/stationary/fixed_point.hpp"
#include "fiberfield/verify/mean_field_limit.hpp"
#include "fiberfield/verify/wasserstein.hpp"

using namespace fiberfield;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string format(const char* fmt, auto... args) {
    char buf[1024];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

void progress(const std::string& msg) { std::fprintf(stderr, "  .. %s\n", msg.c_str()); }

std::shared_ptr<const GeodesicGrid> sphere(int level) {
    static std::map<int, std::shared_ptr<const GeodesicGrid>> cache;
    auto& g = cache[level];
    if (!g) g = std::make_shared<const GeodesicGrid>(build_geodesic_grid(level));
    return g;
}

InteractionPotential preset_U() { return InteractionPotential::smooth_heaviside(10.0, 1.4, 10.0); }

SpatialGrid preset_grid() { return {3, 21, 7.0}; }

StationaryProblem preset_stationary() {
    StationaryProblem prob;
    prob.grid = preset_grid();
    prob.U = preset_U();
    prob.tol = 1e-8;
    prob.relaxation = 0.5;
    return prob;
}

const StationaryResult& stationary_solution() {
    static const StationaryResult result = solve_stationary(preset_stationary());
    return result;
}

MeanFieldConfig preset_meanfield(double H) {
    MeanFieldConfig cfg;
    cfg.grid = preset_grid();
    cfg.level = 1;
    cfg.U = preset_U();
    cfg.kernel = DelayKernel::finite(H);
    return cfg;
}

/// Mean-field density from the box initial condition at time T.
DensityField meanfield_density(double H, double T) {
    static std::map<std::pair<double, double>, DensityField> cache;
    auto it = cache.find({H, T});
    if (it != cache.end()) return it->second;
    progress(format("mean-field H=%g to T=%g", H, T));
    const auto cfg = preset_meanfield(H);
    MeanFieldSolver solver(cfg, box_initial_field(cfg.grid, sphere(cfg.level)));
    solver.advance_to(T);
    return cache[{H, T}] = solver.density();
}

Outcome convergence_order() {
    // Non-interacting problem started in its equilibrium e^{-V}, error at T = 1.
    std::vector<double> errors;
    std::string sizes;
    for (int level = 0; level <= 2; ++level) {
        MeanFieldConfig cfg;
        cfg.grid = SpatialGrid(3, 10 * (1 << level) + 1, 5.0);
        cfg.level = level;
        const auto exact = boltzmann_density(cfg.grid);
        progress(format("convergence run n_x=%d n_k=%zu", cfg.grid.n, sphere(level)->cell_count()));
        MeanFieldSolver solver(cfg, isotropic_field(exact, sphere(level)));
        solver.advance_to(1.0);
        errors.push_back(l2_distance(solver.density(), exact));
        sizes += format("%s(%d,%zu) %.4g", sizes.empty() ? "" : ", ", cfg.grid.n, sphere(level)->cell_count(),
                        errors.back());
    }
    double worst = kInf;
    std::string orders;
    for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
        const double p = std::log2(errors[k] / errors[k + 1]);
        worst = std::min(worst, p);
        orders += format("%s%.3f", orders.empty() ? "" : ", ", p);
    }
    return {worst >= 1.8, "errors " + sizes + "; orders " + orders + " (need >= 1.8)"};
}

Outcome stationary_widening() {
    const auto& r = stationary_solution();
    const double ratio = second_moment(r.rho) / 3.0;
    return {r.converged && ratio > 1.2,
            format("m2 = %.4f, ratio to Gaussian 3.0 = %.4f (need > 1.2), converged=%d after %d iterations",
                   second_moment(r.rho), ratio, int(r.converged), r.iterations)};
}

Outcome delay_independence() {
    const std::pair<double, double> runs[] = {{0.0, 30.0}, {0.1, 30.0}, {kInf, 100.0}};
    std::vector<DensityField> rho;
    for (auto [H, T] : runs) rho.push_back(meanfield_density(H, T));
    const char* names[] = {"0", "0.1", "inf"};
    double worst = 0.0;
    std::string pairs;
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) {
            const double d = rms_difference_relative_to_peak(rho[a], rho[b]);
            worst = std::max(worst, d);
            pairs += format("%sH=%s/H=%s %.4f", pairs.empty() ? "" : ", ", names[a], names[b], d);
        }
    return {worst <= 0.02, "rel. to peak: " + pairs + " (need <= 0.02)"};
}

Outcome cross_scale() {
    const DensityField& star = stationary_solution().rho;
    MacroConfig mc;
    mc.grid = preset_grid();
    mc.U = preset_U();
    mc.kernel = DelayKernel::finite(0.0);
    progress("macro limit H=0 to T=60");
    MacroSolver macro(mc, box_density(mc.grid));
    macro.advance_to(60.0);
    const DensityField mf = meanfield_density(0.0, 30.0);
    const double sm = rms_difference_relative_to_peak(star, macro.density());
    const double sf = rms_difference_relative_to_peak(star, mf);
    const double mfm = rms_difference_relative_to_peak(macro.density(), mf);
    const double worst = std::max({sm, sf, mfm});
    return {worst <= 0.03, format("rel. to peak: stationary/macro %.4f, stationary/meanfield %.4f, "
                                  "macro/meanfield %.4f (need <= 0.03)",
                                  sm, sf, mfm)};
}

Outcome micro_vs_meanfield() {
    MicroConfig cfg;
    cfg.N = 500;
    cfg.groups = 20;
    cfg.dt = 0.01;
    cfg.T = 10.0;
    cfg.seed = 1;
    cfg.U = preset_U();
    cfg.kernel = DelayKernel::finite(0.0);
    progress("micro ensemble 20 x 500 to T=10");
    const auto result = run_ensemble(cfg);
    const SpatialGrid grid = preset_grid();
    const std::span<const FiberState> all(result.final_states);
    const std::size_t half = all.size() / 2;
    const auto full = build_histogram(all, grid).density;
    const auto a = build_histogram(all.first(half), grid).density;
    const auto b = build_histogram(all.subspan(half), grid).density;
    const DensityField mf = meanfield_density(0.0, 10.0);
    const double dist = l2_distance(full, mf);
    // Sampling error of the full ensemble.
    const double floor = 0.5 * l2_distance(a, b);
    return {dist <= 3.0 * floor, format("||micro - meanfield|| = %.4g, noise floor = %.4g (||half_a - half_b|| / 2), "
                                        "ratio %.3f (need <= 3)",
                                        dist, floor, dist / floor)};
}

Outcome exponential_decay() {
    MeanFieldConfig cfg;
    cfg.grid = preset_grid();
    cfg.level = 1;
    MeanFieldSolver solver(cfg, box_initial_field(cfg.grid, sphere(1)));
    std::vector<double> times{0.0};
    std::vector<DensityField> fields{solver.density()};
    progress("non-interacting mean-field to T=36");
    while (solver.time() < 36.0) {
        solver.step();
        times.push_back(solver.time());
        fields.push_back(solver.density());
    }
    const DensityField equilibrium = fields.back();
    times.pop_back();
    fields.pop_back();
    const auto series = l2_distance_series(times, fields, equilibrium);
    const auto fit = fit_log_linear(series, 2.0, 12.0);
    const auto analytic = l2_distance(fields.back(), boltzmann_density(cfg.grid));
    return {fit.r2 >= 0.98,
            format("log-linear fit on t in [2, 12]: rate %.4f, R^2 = %.5f over %zu points (need >= 0.98); "
                   "distance of the limit to e^{-V} = %.3g",
                   -fit.slope, fit.r2, fit.points, analytic)};
}

Outcome property_suites() {
    std::vector<std::string> failures;
    std::string detail;

    {
        MeanFieldConfig cfg = preset_meanfield(kInf);
        cfg.grid = SpatialGrid(3, 13, 5.0);
        progress("1000 Strang steps");
        MeanFieldSolver solver(cfg, box_initial_field(cfg.grid, sphere(1)));
        const double m0 = solver.field().mass();
        double worst = 0.0;
        for (int n = 0; n < 1000; ++n) {
            solver.step();
            worst = std::max(worst, std::abs(solver.field().mass() - m0));
        }
        detail += format("mass drift %.2e", worst);
        if (worst > 1e-10) failures.push_back("mass");
    }
    {
        MicroConfig cfg;
        cfg.N = 200;
        cfg.A = 1.0;
        cfg.dt = 0.01;
        cfg.U = preset_U();
        cfg.kernel = DelayKernel::finite(0.5);
        auto states = box_initial_states(cfg, 0, cfg.total_fibers());
        HistoryBuffer buffer(cfg.kernel, cfg.stride, cfg.dt);
        const Philox rng(cfg.seed);
        std::vector<Vec3> pos(states.size());
        double worst = 0.0;
        for (int n = 0; n < 500; ++n) {
            const double t = n * cfg.dt;
            if (n % cfg.stride == 0) {
                for (std::size_t i = 0; i < states.size(); ++i) pos[i] = states[i].x;
                buffer.record(t, pos);
            }
            const auto forces = interaction_forces(t, states, buffer, *cfg.U, true);
            em_step(states, t, n, cfg.dt, cfg, forces, rng, 0);
            for (const auto& s : states) worst = std::max(worst, std::abs(norm(s.tau) - 1.0));
        }
        detail += format(", max ||tau| - 1| %.1e", worst);
        if (worst > 4 * std::numeric_limits<double>::epsilon()) failures.push_back("unit tangent");
    }
    {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::exponential_distribution<double> spike(1.0);
        double worst = 0.0;
        for (int trial = 0; trial < 10000; ++trial) {
            BezierStencil s;
            for (double& v : s) v = trial % 2 ? u(rng) : (u(rng) < 0.1 ? spike(rng) * 10 : 0.0);
            const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
            const double v = bezier_interpolate(s, {u(rng), u(rng), u(rng)}, true);
            worst = std::max({worst, *lo - v, v - *hi});
        }
        detail += format(", Bezier hull excess %.1e", worst);
        if (worst > 1e-14) failures.push_back("Bezier containment");
    }
    {
        std::mt19937_64 rng(2);
        std::uniform_real_distribution<double> u(-0.6, 0.6);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> ca(30), cb(30);
            for (double& v : ca) v = u(rng);
            for (double& v : cb) v = u(rng);
            const EmpiricalMeasure a(6, ca), b(6, cb);
            std::vector<std::size_t> perm(5);
            std::iota(perm.begin(), perm.end(), 0);
            double best = kInf;
            do {
                double sum = 0.0;
                for (std::size_t i = 0; i < 5; ++i) sum += truncated_distance(a.point(i), b.point(perm[i]));
                best = std::min(best, sum / 5.0);
            } while (std::next_permutation(perm.begin(), perm.end()));
            worst = std::max(worst, std::abs(wasserstein1(a, b) - best));
        }
        detail += format(", W1 vs brute force %.1e", worst);
        if (worst > 1e-12) failures.push_back("W1 oracle");
    }
    {
        DeterministicConfig cfg;
        cfg.U = preset_U();
        cfg.kernel = DelayKernel::infinite();
        progress("stability ratios for 5 seed pairs");
        double worst = 0.0;
        bool ok = true;
        for (std::uint64_t s = 0; s < 5; ++s) {
            const auto check = stability_check(cfg, 100, 1.0, 2 * s + 1, 2 * s + 2);
            worst = std::max(worst, check.ratio / check.bound);
            ok = ok && check.ratio <= check.bound;
        }
        detail += format(", max ratio/bound %.3g", worst);
        if (!ok) failures.push_back("stability bound");
    }
    std::string failed;
    for (const auto& f : failures) failed += (failed.empty() ? "" : ", ") + f;
    return {failures.empty(), detail + (failed.empty() ? "" : "; failed: " + failed)};
}

Outcome fixed_point_diagnostics() {
    const auto& r = stationary_solution();
    const auto prob = preset_stationary();
    double min_value = kInf, mass_err = 0.0;
    for (const auto& it : r.history) {
        min_value = std::min(min_value, it.min_value);
        mass_err = std::max(mass_err, std::abs(it.mass - 1.0));
    }
    const double F0 = energy(r.initial, prob);
    const double F = energy(r.rho, prob);
    const double residual = r.residual.density_scaled_max;
    const bool pass = r.converged && min_value > 0.0 && mass_err <= 1e-12 && F <= F0 && residual <= 10 * prob.tol;
    return {pass, format("min iterate %.3g, max |mass - 1| %.1e, F(rho*) = %.5f <= F(rho0) = %.5f, "
                         "residual %.2e (need <= %.0e)",
                         min_value, mass_err, F, F0, residual, 10 * prob.tol)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"convergence order", convergence_order},
        {"stationary widening", stationary_widening},
        {"delay independence", delay_independence},
        {"cross-scale agreement", cross_scale},
        {"micro vs mean-field", micro_vs_meanfield},
        {"exponential decay", exponential_decay},
        {"property suites", property_suites},
        {"fixed-point diagnostics", fixed_point_diagnostics},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    // The lines are mirrored to acceptance_report.txt in the working directory.
    std::FILE* report = std::fopen("acceptance_report.txt", "w");
    int failed = 0;
    for (int k = 0; k < 8; ++k) {
        if (!selected.empty() && !selected.count(k + 1)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = criteria[k].second();
        } catch (const std::exception& e) {
            outcome = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const std::string line = format("criterion %d %-24s %s  %s [%.0f s]\n", k + 1, criteria[k].first,
                                        outcome.pass ? "PASS" : "FAIL", outcome.detail.c_str(), secs);
        std::fputs(line.c_str(), stdout);
        std::fflush(stdout);
        if (report) {
            std::fputs(line.c_str(), report);
            std::fflush(report);
        }
        failed += outcome.pass ? 0 : 1;
    }
    if (report) std::fclose(report);
    return failed == 0 ? 0 : 1;
}
