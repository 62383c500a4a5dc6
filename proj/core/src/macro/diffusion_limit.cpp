#include "fiberfield/macro/diffusion_limit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fiberfield/core/error.hpp"
#include "fiberfield/core/parallel.hpp"

namespace fiberfield {

void MacroConfig::validate() const {
    grid.validate();
    if (!(A > 0.0) || !std::isfinite(A)) throw ConfigError("macro: A must be positive");
    kernel.validate();
    if (U) U->validate();
    if (!(dt >= 0.0) || !std::isfinite(dt)) throw ConfigError("macro: dt must be finite and >= 0");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw ConfigError("macro: cfl_safety must lie in (0, 1]");
    if (!(threshold_frac >= 0.0 && threshold_frac < 1.0)) throw ConfigError("macro: threshold_frac must lie in [0, 1)");
}

double MacroConfig::kappa() const {
    const double d = grid.dim;
    return 2.0 / (d * (d - 1.0) * A * A);
}

namespace {

std::size_t axis_stride(const SpatialGrid& g, int axis) {
    std::size_t s = 1;
    for (int a = g.dim - 1; a > axis; --a) s *= static_cast<std::size_t>(g.n);
    return s;
}

}  // namespace

double macro_stability_rate(const MacroConfig& cfg, std::span<const double> phi) {
    const SpatialGrid& g = cfg.grid;
    const double scale = cfg.kappa() / (g.dx() * g.dx());
    double worst = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
        const auto idx = g.multi_index(p);
        double sum = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            const std::size_t s = axis_stride(g, a);
            // Outflow coefficient of rho_p through each face.
            if (idx[a] + 1 < g.n) sum += bernoulli(phi[p + s] - phi[p]);
            if (idx[a] > 0) sum += bernoulli(phi[p - s] - phi[p]);
        }
        worst = std::max(worst, sum);
    }
    return scale * worst;
}

MacroStepReport diffusion_limit_step(DensityField& rho, std::span<const double> phi, double dt, const MacroConfig& cfg) {
    const SpatialGrid& g = cfg.grid;
    if (!(rho.grid == g) || phi.size() != g.size()) throw MismatchError("diffusion_limit_step: grid mismatch");
    MacroStepReport report;
    report.courant = dt * macro_stability_rate(cfg, phi);
    if (report.courant > 1.0) {
        std::ostringstream msg;
        msg << "diffusion_limit_step: CFL violated (dt * rate = " << report.courant << " > 1)";
        throw CflError(msg.str());
    }
    report.mass_before = rho.mass();
    const double coeff = cfg.kappa() / (g.dx() * g.dx());
    std::vector<double> delta(g.size(), 0.0);
    // Each face is visited once, from its lower cell, and applied antisymmetrically.
    for (int a = 0; a < g.dim; ++a) {
        const std::size_t s = axis_stride(g, a);
        for (std::size_t p = 0; p < g.size(); ++p) {
            if (g.multi_index(p)[a] + 1 >= g.n) continue;
            const double d = phi[p + s] - phi[p];
            const double flux = coeff * (bernoulli(d) * rho.values[p] - bernoulli(-d) * rho.values[p + s]);
            delta[p] -= flux;
            delta[p + s] += flux;
        }
    }
    for (std::size_t p = 0; p < g.size(); ++p) {
        rho.values[p] += dt * delta[p];
        if (!std::isfinite(rho.values[p])) throw InvalidStateError("diffusion_limit_step: non-finite density");
    }
    report.mass_after = rho.mass();
    return report;
}

std::vector<double> macro_potential(const MacroConfig& cfg, const ForceFieldCache* cache, double t) {
    std::vector<double> phi(cfg.grid.size());
    for (std::size_t p = 0; p < phi.size(); ++p) phi[p] = cfg.V.value(cfg.grid.point(p));
    if (cfg.U) {
        if (!cache) throw InvalidStateError("macro: interaction requires a potential cache");
        const auto avg = cache->average(t);
        for (std::size_t p = 0; p < phi.size(); ++p) phi[p] += avg[p];
    }
    return phi;
}

MacroSolver::MacroSolver(MacroConfig cfg, DensityField initial) : cfg_(std::move(cfg)), rho_(std::move(initial)) {
    cfg_.validate();
    if (!(rho_.grid == cfg_.grid)) throw MismatchError("macro solver: initial density grid differs from config");
    if (cfg_.U) {
        cache_.emplace(build_convolution_stencil(cfg_.grid, *cfg_.U, cfg_.threshold_frac, ConvolutionKind::value),
                       cfg_.kernel);
        cache_->record(time_, rho_);
    }
    dt_ = cfg_.dt > 0.0 ? cfg_.dt : cfg_.cfl_safety / macro_stability_rate(cfg_, potential());
}

std::vector<double> MacroSolver::potential() const {
    return macro_potential(cfg_, cache_ ? &*cache_ : nullptr, time_);
}

void MacroSolver::step(double until) {
    const double h = std::min(dt_, until - time_);
    if (!(h > 0.0)) return;
    report_ = diffusion_limit_step(rho_, potential(), h, cfg_);
    time_ += h;
    if (cache_) cache_->record(time_, rho_);
}

void MacroSolver::advance_to(double T, const std::function<void(const MacroSolver&)>& observer) {
    while (time_ < T - 1e-9 * dt_) {
        step(T);
        if (observer) observer(*this);
    }
}

}  // namespace fiberfield
