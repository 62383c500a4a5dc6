#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>

#include "fiberfield/core/delay.hpp"
#include "fiberfield/core/potentials.hpp"
#include "fiberfield/meanfield/convolution.hpp"
#include "fiberfield/meanfield/kinetic_field.hpp"
#include "fiberfield/meanfield/transport.hpp"
#include "fiberfield/meanfield/velocity_step.hpp"

namespace fiberfield {

struct MeanFieldConfig {
    SpatialGrid grid{3, 21, 7.0};
    int level = 1;
    double A = 1.0;
    DelayKernel kernel;
    CoilingPotential V;
    std::optional<InteractionPotential> U;
    double threshold_frac = 1e-3;
    /// Time step; 0 selects safety * (diffusion stability limit).
    double dt = 0.0;
    double cfl_safety = 0.5;
    VelocityStepOptions velocity{true, 0.5};
    TransportOptions transport;

    void validate() const;
    /// dt actually used for the given velocity grid.
    double resolved_dt(const GeodesicGrid& grid_v) const;
};

struct StrangReport {
    VelocityStepReport first;
    TransportReport transport;
    VelocityStepReport second;
};

/// Symmetric split step: velocity half-step with the force at t, transport
/// over dt, record U * rho(t + dt) in the cache, velocity half-step with the
/// force at t + dt. `cache` may be null when U is absent.
StrangReport strang_step(KineticField& f, double dt, const MeanFieldConfig& cfg, ForceFieldCache* cache);

/// Total force grad V + delay-averaged interaction at every grid point.
std::vector<Vec3> total_force(const KineticField& f, const MeanFieldConfig& cfg, const ForceFieldCache* cache);

class MeanFieldSolver {
public:
    MeanFieldSolver(MeanFieldConfig cfg, KineticField initial);

    const KineticField& field() const { return f_; }
    const MeanFieldConfig& config() const { return cfg_; }
    double time() const { return f_.time; }
    double dt() const { return dt_; }
    DensityField density() const { return moment_density(f_); }
    const StrangReport& last_report() const { return report_; }

    /// One step of length min(dt, remaining) where remaining = until - time.
    void step(double until = std::numeric_limits<double>::infinity());
    /// Steps until time T, calling observer after every step.
    void advance_to(double T, const std::function<void(const MeanFieldSolver&)>& observer = {});

private:
    MeanFieldConfig cfg_;
    KineticField f_;
    std::optional<ForceFieldCache> cache_;
    double dt_ = 0.0;
    StrangReport report_;
};

}  // namespace fiberfield
