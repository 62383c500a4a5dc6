#include "fiberfield/harness/run.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "fiberfield/core/error.hpp"
#include "fiberfield/core/parallel.hpp"
#include "fiberfield/harness/io.hpp"
#include "fiberfield/meanfield/checkpoint.hpp"
#include "fiberfield/micro/histogram.hpp"

namespace fiberfield {

namespace {

namespace fs = std::filesystem;

class OutputSet {
public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

    std::ofstream open(const std::string& name) {
        std::ofstream out(dir_ / name);
        if (!out) throw Error("cannot write '" + (dir_ / name).string() + "'");
        names_.push_back(name);
        return out;
    }
    fs::path path(const std::string& name) {
        names_.push_back(name);
        return dir_ / name;
    }
    const std::vector<std::string>& names() const { return names_; }

private:
    fs::path dir_;
    std::vector<std::string> names_;
};

void write_density(OutputSet& out, const std::string& name, const DensityField& rho) {
    auto s = out.open(name);
    write_density_csv(s, rho);
}

void write_radial(OutputSet& out, const std::string& name, const DensityField& rho, int bins) {
    auto s = out.open(name);
    write_radial_csv(s, radial_profile(rho, bins));
}

void write_series(OutputSet& out, const std::string& name, const std::vector<SeriesPoint>& series) {
    auto s = out.open(name);
    write_series_csv(s, series);
}

/// Snapshot times k * interval strictly inside (0, T], plus T itself.
std::vector<double> snapshot_times(double interval, double T) {
    std::vector<double> times;
    if (interval > 0.0)
        for (int k = 1; k * interval < T * (1.0 - 1e-12); ++k) times.push_back(k * interval);
    times.push_back(T);
    return times;
}

DensityField stationary_reference(const ExperimentConfig& cfg) {
    const auto result = solve_stationary(cfg.stationary());
    return result.rho;
}

void run_micro(const ExperimentConfig& cfg, OutputSet& out, RunSummary& summary) {
    const MicroConfig mc = cfg.micro();
    const auto result = run_ensemble(mc);
    const SpatialGrid grid = cfg.grid();
    const auto hist = build_histogram(std::span<const FiberState>(result.final_states), grid);
    write_density(out, "micro_density.csv", hist.density);
    if (mc.groups >= 2) {
        const std::size_t split = static_cast<std::size_t>(mc.groups / 2) * mc.N;
        const std::span<const FiberState> all(result.final_states);
        write_density(out, "micro_half_a_density.csv", build_histogram(all.first(split), grid).density);
        write_density(out, "micro_half_b_density.csv", build_histogram(all.subspan(split), grid).density);
    }
    if (!result.snapshots.empty()) {
        auto s = out.open("micro_snapshots.csv");
        write_snapshots_csv(s, result, mc.dim, mc.N);
    }
    write_radial(out, "micro_radial.csv", hist.density, cfg.output.radial_bins);
    summary.results.emplace_back("fibers", static_cast<double>(hist.total));
    summary.results.emplace_back("out_of_domain_fraction",
                                 static_cast<double>(hist.out_of_domain) / static_cast<double>(hist.total));
    summary.results.emplace_back("second_moment", second_moment(hist.density));
}

void run_meanfield(const ExperimentConfig& cfg, OutputSet& out, RunSummary& summary) {
    const MeanFieldConfig mc = cfg.meanfield();
    auto gv = std::make_shared<const GeodesicGrid>(build_geodesic_grid(mc.level));
    MeanFieldSolver solver(mc, box_initial_field(mc.grid, gv));
    const DensityField reference = stationary_reference(cfg);
    std::vector<SeriesPoint> series{{0.0, l2_distance(solver.density(), reference)}};
    for (double target : snapshot_times(cfg.output.snapshot_interval, cfg.numerics.T)) {
        while (solver.time() < target) solver.step(target);
        series.push_back({solver.time(), l2_distance(solver.density(), reference)});
    }
    const DensityField rho = solver.density();
    write_density(out, "meanfield_density.csv", rho);
    write_kinetic_checkpoint(out.path("meanfield_field.ffk"), solver.field());
    write_series(out, "meanfield_l2_series.csv", series);
    write_radial(out, "meanfield_radial.csv", rho, cfg.output.radial_bins);
    summary.results.emplace_back("dt", solver.dt());
    summary.results.emplace_back("mass", solver.field().mass());
    summary.results.emplace_back("min_value", solver.field().min());
    summary.results.emplace_back("l2_to_stationary", series.back().l2);
    summary.results.emplace_back("rms_rel_peak_to_stationary", rms_difference_relative_to_peak(rho, reference));
    summary.results.emplace_back("boundary_fraction", solver.last_report().transport.boundary_fraction);
}

void run_stationary(const ExperimentConfig& cfg, OutputSet& out, RunSummary& summary) {
    const StationaryProblem prob = cfg.stationary();
    const auto result = solve_stationary(prob);
    write_density(out, "stationary_density.csv", result.rho);
    {
        auto s = out.open("stationary_residuals.csv");
        write_residuals_csv(s, result.history);
    }
    write_density_checkpoint(out.path("stationary_density.ffd"), result.rho);
    write_radial(out, "stationary_radial.csv", result.rho, cfg.output.radial_bins);
    if (!result.converged)
        summary.warnings.push_back("stationary: not converged after " + std::to_string(result.iterations) +
                                   " iterations");
    if (result.clamped > 0)
        summary.warnings.push_back("stationary: " + std::to_string(result.clamped) + " exponents clamped");
    summary.results.emplace_back("converged", result.converged ? 1.0 : 0.0);
    summary.results.emplace_back("iterations", result.iterations);
    summary.results.emplace_back("final_defect", result.history.empty() ? 0.0 : result.history.back().linf_diff);
    summary.results.emplace_back("residual_density_scaled_max", result.residual.density_scaled_max);
    summary.results.emplace_back("energy", energy(result.rho, prob));
    summary.results.emplace_back("energy_initial", energy(result.initial, prob));
    summary.results.emplace_back("second_moment", second_moment(result.rho));
}

void run_macro(const ExperimentConfig& cfg, OutputSet& out, RunSummary& summary) {
    MacroSolver solver(cfg.macro(), box_density(cfg.grid()));
    const DensityField reference = stationary_reference(cfg);
    std::vector<SeriesPoint> series{{0.0, l2_distance(solver.density(), reference)}};
    for (double target : snapshot_times(cfg.output.snapshot_interval, cfg.numerics.T)) {
        while (solver.time() < target) solver.step(target);
        series.push_back({solver.time(), l2_distance(solver.density(), reference)});
    }
    const DensityField& rho = solver.density();
    write_density(out, "macro_density.csv", rho);
    write_series(out, "macro_l2_series.csv", series);
    write_radial(out, "macro_radial.csv", rho, cfg.output.radial_bins);
    summary.results.emplace_back("dt", solver.dt());
    summary.results.emplace_back("mass", rho.mass());
    summary.results.emplace_back("l2_to_stationary", series.back().l2);
    summary.results.emplace_back("rms_rel_peak_to_stationary", rms_difference_relative_to_peak(rho, reference));
}

void run_verify(const ExperimentConfig& cfg, OutputSet& out, RunSummary& summary) {
    const auto report = convergence_study(cfg.verification());
    {
        auto s = out.open("verify_report.csv");
        write_verify_csv(s, report);
    }
    double worst = 0.0;
    for (const auto& r : report.rows) worst = std::max(worst, r.ratio);
    summary.results.emplace_back("lipschitz", report.lipschitz);
    summary.results.emplace_back("max_ratio", worst);
    summary.results.emplace_back("max_unit_error", report.max_unit_error);
    if (worst > stability_bound(report.lipschitz, cfg.verify.T))
        summary.warnings.push_back("verify: a measured ratio exceeds the stability bound");
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void run_compare(const ExperimentConfig& cfg, const fs::path& dir, OutputSet& out, RunSummary& summary) {
    const auto rows = compare_densities(dir, cfg.compare.inputs);
    auto s = out.open("comparison.csv");
    s << "a,b,l2,rms_rel_peak\n";
    for (const auto& r : rows) {
        s << r.a << ',' << r.b << ',' << fmt(r.l2) << ',' << fmt(r.rms_rel_peak) << '\n';
        summary.results.emplace_back(r.a + "_vs_" + r.b + "_l2", r.l2);
    }
}

void write_manifest(const fs::path& dir, const ExperimentConfig& cfg, const RunSummary& summary) {
    nlohmann::ordered_json doc;
    doc["mode"] = to_string(summary.mode);
    doc["version"] = version();
    doc["config"] = nlohmann::ordered_json::parse(serialize_config(cfg));
    doc["workers"] = worker_count();
    doc["wall_seconds"] = summary.wall_seconds;
    doc["outputs"] = summary.outputs;
    auto& results = doc["results"] = nlohmann::ordered_json::object();
    for (const auto& [key, value] : summary.results) results[key] = std::isfinite(value) ? nlohmann::ordered_json(value) : nlohmann::ordered_json();
    doc["warnings"] = summary.warnings;
    std::ofstream out(dir / "manifest.json");
    out << doc.dump(2) << '\n';
    if (!out) throw Error("cannot write '" + (dir / "manifest.json").string() + "'");
}

}  // namespace

std::string version() { return FIBERFIELD_VERSION; }

DensityField box_density(const SpatialGrid& grid) {
    DensityField rho(grid);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const Vec3 x = grid.point(p);
        bool inside = true;
        for (int a = 0; a < grid.dim; ++a) inside = inside && std::abs(x[a]) <= 1.0 + 1e-12;
        if (inside) rho.values[p] = 1.0;
    }
    const double m = rho.mass();
    if (m <= 0.0) throw ConfigError("box initial condition: no grid point inside [-1, 1]^d");
    for (double& v : rho.values) v /= m;
    return rho;
}

std::vector<Comparison> compare_densities(const fs::path& dir, const std::vector<std::string>& inputs) {
    std::vector<std::string> missing;
    for (const auto& name : inputs) {
        const fs::path p = dir / (name + "_density.csv");
        if (!fs::exists(p)) missing.push_back(p.string());
    }
    if (!missing.empty()) {
        std::string msg = "missing input files:";
        for (const auto& m : missing) msg += " " + m;
        throw Error(msg);
    }
    std::vector<std::pair<std::string, DensityField>> fields;
    for (const auto& name : inputs) fields.emplace_back(name, read_density_csv(dir / (name + "_density.csv")));
    std::vector<Comparison> rows;
    auto add = [&](const std::string& a, const DensityField& ra, const std::string& b, const DensityField& rb) {
        if (!(ra.grid == rb.grid)) throw MismatchError("compare: " + a + " and " + b + " use different grids");
        rows.push_back({a, b, l2_distance(ra, rb), rms_difference_relative_to_peak(ra, rb)});
    };
    for (std::size_t i = 0; i < fields.size(); ++i)
        for (std::size_t j = i + 1; j < fields.size(); ++j)
            add(fields[i].first, fields[i].second, fields[j].first, fields[j].second);
    const bool has_micro = std::find(inputs.begin(), inputs.end(), "micro") != inputs.end();
    if (has_micro && fs::exists(dir / "micro_half_a_density.csv") && fs::exists(dir / "micro_half_b_density.csv"))
        add("micro_half_a", read_density_csv(dir / "micro_half_a_density.csv"), "micro_half_b",
            read_density_csv(dir / "micro_half_b_density.csv"));
    return rows;
}

RunSummary run(Mode mode, const ExperimentConfig& cfg, const fs::path& out_dir) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error("cannot create output directory '" + out_dir.string() + "': " + ec.message());
    fs::remove(out_dir / "COMPLETED", ec);

    RunSummary summary;
    summary.mode = mode;
    summary.out_dir = out_dir;
    OutputSet out(out_dir);
    try {
        switch (mode) {
            case Mode::micro: run_micro(cfg, out, summary); break;
            case Mode::meanfield: run_meanfield(cfg, out, summary); break;
            case Mode::stationary: run_stationary(cfg, out, summary); break;
            case Mode::macro: run_macro(cfg, out, summary); break;
            case Mode::verify: run_verify(cfg, out, summary); break;
            case Mode::compare: run_compare(cfg, out_dir, out, summary); break;
        }
    } catch (const CflError& e) {
        throw CflError(to_string(mode) + ": " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(to_string(mode) + ": " + e.what());
    } catch (const MismatchError& e) {
        throw MismatchError(to_string(mode) + ": " + e.what());
    } catch (const InvalidStateError& e) {
        throw InvalidStateError(to_string(mode) + ": " + e.what());
    } catch (const Error& e) {
        throw Error(to_string(mode) + ": " + e.what());
    }
    summary.outputs = out.names();
    summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(out_dir, cfg, summary);
    std::ofstream marker(out_dir / "COMPLETED");
    marker << "ok\n";
    if (!marker) throw Error("cannot write completion marker in '" + out_dir.string() + "'");
    return summary;
}

}  // namespace fiberfield
