#include "fiberfield/meanfield/solver.hpp"

#include <cmath>
#include <limits>

#include "fiberfield/core/error.hpp"

namespace fiberfield {

void MeanFieldConfig::validate() const {
    grid.validate();
    if (grid.dim != 3) throw ConfigError("meanfield: only three space dimensions are supported");
    if (level < 0 || level > 7) throw ConfigError("meanfield: level must lie in [0, 7]");
    if (!(A >= 0.0) || !std::isfinite(A)) throw ConfigError("meanfield: A must be finite and >= 0");
    kernel.validate();
    if (U) U->validate();
    if (!(threshold_frac >= 0.0 && threshold_frac < 1.0)) throw ConfigError("meanfield: threshold_frac must lie in [0, 1)");
    if (!(dt >= 0.0) || !std::isfinite(dt)) throw ConfigError("meanfield: dt must be finite and >= 0");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw ConfigError("meanfield: cfl_safety must lie in (0, 1]");
    if (dt == 0.0 && A == 0.0) throw ConfigError("meanfield: dt must be given when A = 0");
}

double MeanFieldConfig::resolved_dt(const GeodesicGrid& grid_v) const {
    if (dt > 0.0) return dt;
    // Half-step s = dt / 2 must satisfy s (A^2 / 2) factor <= 1.
    return 2.0 * cfl_safety / (0.5 * A * A * diffusion_factor(grid_v));
}

std::vector<Vec3> total_force(const KineticField& f, const MeanFieldConfig& cfg, const ForceFieldCache* cache) {
    std::vector<Vec3> g(f.points());
    for (std::size_t p = 0; p < g.size(); ++p) g[p] = cfg.V.gradient(f.grid_x.point(p));
    if (cfg.U) {
        if (!cache) throw InvalidStateError("meanfield: interaction requires a force cache");
        const auto avg = cache->average(f.time);
        for (std::size_t p = 0; p < g.size(); ++p) g[p] += Vec3{avg[3 * p], avg[3 * p + 1], avg[3 * p + 2]};
    }
    return g;
}

StrangReport strang_step(KineticField& f, double dt, const MeanFieldConfig& cfg, ForceFieldCache* cache) {
    StrangReport r;
    r.first = velocity_halfstep(f, total_force(f, cfg, cache), cfg.A, dt, cfg.velocity);
    r.transport = transport_step(f, dt, cfg.transport);
    f.time += dt;
    if (cfg.U) cache->record(f.time, moment_density(f));
    r.second = velocity_halfstep(f, total_force(f, cfg, cache), cfg.A, dt, cfg.velocity);
    for (double v : f.values)
        if (!std::isfinite(v)) throw InvalidStateError("meanfield: non-finite value after step");
    return r;
}

MeanFieldSolver::MeanFieldSolver(MeanFieldConfig cfg, KineticField initial) : cfg_(std::move(cfg)), f_(std::move(initial)) {
    cfg_.validate();
    if (!(f_.grid_x == cfg_.grid)) throw MismatchError("meanfield solver: initial field grid differs from config");
    if (f_.grid_v->level != cfg_.level) throw MismatchError("meanfield solver: initial field level differs from config");
    dt_ = cfg_.resolved_dt(*f_.grid_v);
    if (cfg_.U) {
        cache_.emplace(build_convolution_stencil(cfg_.grid, *cfg_.U, cfg_.threshold_frac, ConvolutionKind::gradient),
                       cfg_.kernel);
        cache_->record(f_.time, moment_density(f_));
    }
}

void MeanFieldSolver::step(double until) {
    double h = dt_;
    const double remaining = until - f_.time;
    if (remaining < h) h = remaining;
    if (!(h > 0.0)) return;
    report_ = strang_step(f_, h, cfg_, cache_ ? &*cache_ : nullptr);
}

void MeanFieldSolver::advance_to(double T, const std::function<void(const MeanFieldSolver&)>& observer) {
    // Tolerance avoids a sliver step from accumulated rounding.
    while (f_.time < T - 1e-9 * dt_) {
        step(T);
        if (observer) observer(*this);
    }
}

}  // namespace fiberfield
