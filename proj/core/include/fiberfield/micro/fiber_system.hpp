#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fiberfield/core/delay.hpp"
#include "fiberfield/core/potentials.hpp"
#include "fiberfield/core/rng.hpp"
#include "fiberfield/micro/history_buffer.hpp"

namespace fiberfield {

/// Position and unit tangent of one fiber end point.
struct FiberState {
    Vec3 x;
    Vec3 tau;

    friend bool operator==(const FiberState&, const FiberState&) = default;
};

struct MicroConfig {
    int dim = 3;
    int N = 1;       // fibers per group
    int groups = 1;  // independent interacting groups
    double A = 1.0;
    double dt = 1e-3;
    double T = 1.0;
    std::uint64_t seed = 1;
    DelayKernel kernel;
    CoilingPotential V;
    std::optional<InteractionPotential> U;
    int stride = 10;
    /// Physical time between snapshots; 0 disables snapshots.
    double snapshot_interval = 0.0;

    /// Throws ConfigError on invalid parameters.
    void validate() const;
    std::size_t total_fibers() const { return static_cast<std::size_t>(N) * groups; }
    /// Number of steps; the last step is shortened to land exactly on T.
    std::int64_t steps() const;
};

/// Retarded force (1/N) sum_j avg_s grad U(x_i(t) - x_j(s)) acting on fiber i.
///
/// The average runs uniformly over the history records in the delay window.
/// With an instantaneous kernel (H = 0), or at t = 0 with an empty buffer,
/// the current positions are used. Self-interaction j = i is included.
Vec3 retarded_interaction_force(std::size_t i, double t, std::span<const FiberState> current,
                                const HistoryBuffer& buffer, const InteractionPotential& U);

/// Retarded forces for all fibers of a group (data-parallel when `parallel`).
std::vector<Vec3> interaction_forces(double t, std::span<const FiberState> current, const HistoryBuffer& buffer,
                                     const InteractionPotential& U, bool parallel);

/// One Euler-Maruyama step of the Ito system for every fiber of a group.
///
/// `forces` holds the retarded interaction per fiber (empty when U is absent);
/// `first_fiber` is the global id of fiber 0, used to key the noise stream.
/// Throws InvalidStateError naming fiber and time if a state turns non-finite.
void em_step(std::span<FiberState> states, double t, std::int64_t step, double dt, const MicroConfig& cfg,
             std::span<const Vec3> forces, const Philox& rng, std::uint64_t first_fiber);

/// Box initial condition: x uniform in [-1, 1]^d, tau uniform with tau_d > 0.
std::vector<FiberState> box_initial_states(const MicroConfig& cfg, std::uint64_t first_fiber, std::size_t count);

struct EnsembleSnapshot {
    double t = 0.0;
    std::vector<FiberState> states;  // group-major, all fibers
};

struct EnsembleResult {
    std::vector<FiberState> final_states;  // group-major
    std::vector<EnsembleSnapshot> snapshots;
    double final_time = 0.0;
};

/// Runs all groups from the box initial condition (or from `initial` when given,
/// group-major with total_fibers() entries). Bitwise reproducible for fixed
/// (seed, cfg) regardless of worker count.
EnsembleResult run_ensemble(const MicroConfig& cfg, std::span<const FiberState> initial = {});

}  // namespace fiberfield
