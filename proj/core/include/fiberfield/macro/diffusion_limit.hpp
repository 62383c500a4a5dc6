#pragma once

#include <functional>
#include <optional>

#include "fiberfield/core/bernoulli.hpp"
#include "fiberfield/core/delay.hpp"
#include "fiberfield/core/potentials.hpp"
#include "fiberfield/core/spatial_grid.hpp"
#include "fiberfield/meanfield/convolution.hpp"

namespace fiberfield {

struct MacroConfig {
    double A = 1.0;
    DelayKernel kernel;
    SpatialGrid grid{3, 21, 7.0};
    CoilingPotential V;
    std::optional<InteractionPotential> U;
    /// Time step; 0 selects cfl_safety times the stability limit of the initial state.
    double dt = 0.0;
    double cfl_safety = 0.5;
    /// Relative cut of the potential convolution stencil.
    double threshold_frac = 1e-12;

    void validate() const;
    /// kappa = 2 / (d (d - 1) A^2)
    double kappa() const;
};

struct MacroStepReport {
    double courant = 0.0;  // max_p (kappa dt / dx^2) sum_faces B
    double mass_before = 0.0;
    double mass_after = 0.0;
};

/// Largest value of (kappa / dx^2) sum_faces B over the grid for potential phi;
/// explicit steps are stable and positivity preserving for dt * rate <= 1.
double macro_stability_rate(const MacroConfig& cfg, std::span<const double> phi);

/// Explicit conservative step of d_t rho = kappa div(rho grad(ln rho + phi)).
///
/// Face fluxes use exponential fitting,
///   J = (kappa / dx) [B(dphi) rho_L - B(-dphi) rho_R],   dphi = phi_R - phi_L,
/// which reduces to the arithmetic-mean/centred flux for small dphi and
/// vanishes exactly when rho is proportional to e^{-phi}. Boundary faces carry
/// no flux. Throws CflError when dt * rate > 1.
MacroStepReport diffusion_limit_step(DensityField& rho, std::span<const double> phi, double dt, const MacroConfig& cfg);

/// phi = V + delay-averaged U * rho from the cache (V alone without U).
std::vector<double> macro_potential(const MacroConfig& cfg, const ForceFieldCache* cache, double t);

class MacroSolver {
public:
    MacroSolver(MacroConfig cfg, DensityField initial);

    const DensityField& density() const { return rho_; }
    double time() const { return time_; }
    double dt() const { return dt_; }
    const MacroStepReport& last_report() const { return report_; }
    const MacroConfig& config() const { return cfg_; }

    void step(double until = std::numeric_limits<double>::infinity());
    void advance_to(double T, const std::function<void(const MacroSolver&)>& observer = {});

    /// Potential phi at the current time.
    std::vector<double> potential() const;

private:
    MacroConfig cfg_;
    DensityField rho_;
    std::optional<ForceFieldCache> cache_;
    double time_ = 0.0;
    double dt_ = 0.0;
    MacroStepReport report_;
};

}  // namespace fiberfield
