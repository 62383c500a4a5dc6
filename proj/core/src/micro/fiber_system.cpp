#include "fiberfield/micro/fiber_system.hpp"

#include <cmath>
#include <sstream>

#include "fiberfield/core/error.hpp"
#include "fiberfield/core/parallel.hpp"
#include "fiberfield/core/tangent.hpp"

namespace fiberfield {

void MicroConfig::validate() const {
    if (dim != 2 && dim != 3) throw ConfigError("micro: dim must be 2 or 3");
    if (N < 1) throw ConfigError("micro: N must be >= 1");
    if (groups < 1) throw ConfigError("micro: groups must be >= 1");
    if (!(A >= 0.0) || !std::isfinite(A)) throw ConfigError("micro: A must be finite and >= 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("micro: dt must be positive");
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("micro: T must be positive");
    if (dt > T) throw ConfigError("micro: dt must not exceed T");
    if (stride < 1) throw ConfigError("micro: stride must be >= 1");
    if (!(snapshot_interval >= 0.0)) throw ConfigError("micro: snapshot_interval must be >= 0");
    kernel.validate();
    if (U) U->validate();
}

std::int64_t MicroConfig::steps() const {
    return static_cast<std::int64_t>(std::ceil(T / dt - 1e-9));
}

Vec3 retarded_interaction_force(std::size_t i, double t, std::span<const FiberState> current,
                                const HistoryBuffer& buffer, const InteractionPotential& U) {
    const std::size_t n = current.size();
    const Vec3 xi = current[i].x;
    Vec3 sum;
    if (buffer.kernel().is_instantaneous() || buffer.empty()) {
        if (buffer.empty() && t > 0.0 && !buffer.kernel().is_instantaneous())
            throw InvalidStateError("retarded force: empty history at t > 0");
        for (std::size_t j = 0; j < n; ++j) sum += U.gradient(xi - current[j].x);
        return sum * (1.0 / static_cast<double>(n));
    }
    const auto [first, last] = buffer.window(t);
    for (std::size_t k = first; k < last; ++k) {
        const auto& pos = buffer[k].positions;
        for (std::size_t j = 0; j < pos.size(); ++j) sum += U.gradient(xi - pos[j]);
    }
    return sum * (1.0 / (static_cast<double>(n) * static_cast<double>(last - first)));
}

std::vector<Vec3> interaction_forces(double t, std::span<const FiberState> current, const HistoryBuffer& buffer,
                                     const InteractionPotential& U, bool parallel) {
    std::vector<Vec3> out(current.size());
    auto body = [&](std::size_t i) { out[i] = retarded_interaction_force(i, t, current, buffer, U); };
    if (parallel)
        parallel_for(current.size(), body);
    else
        for (std::size_t i = 0; i < current.size(); ++i) body(i);
    return out;
}

void em_step(std::span<FiberState> states, double t, std::int64_t step, double dt, const MicroConfig& cfg,
             std::span<const Vec3> forces, const Philox& rng, std::uint64_t first_fiber) {
    const double d = cfg.dim;
    const double drift_scale = 1.0 / (d - 1.0);
    const double ito = 0.5 * (d - 1.0) * cfg.A * cfg.A;
    const double noise = std::sqrt(dt) * cfg.A;
    for (std::size_t k = 0; k < states.size(); ++k) {
        FiberState& s = states[k];
        Vec3 g = cfg.V.gradient(s.x);
        if (!forces.empty()) g += forces[k];
        const Vec3 r = gaussian_vector(rng, first_fiber + k, static_cast<std::uint64_t>(step), cfg.dim);
        const Vec3 tau = s.tau;
        Vec3 next = tau + dt * (-drift_scale * project_tangent_unchecked(tau, g) - ito * tau) +
                    noise * project_tangent_unchecked(tau, r);
        s.x += dt * tau;
        s.tau = normalized(next);
        if (!is_finite(s.x) || !is_finite(s.tau)) {
            std::ostringstream msg;
            msg << "em_step: non-finite state for fiber " << first_fiber + k << " at t=" << t;
            throw InvalidStateError(msg.str());
        }
    }
}

std::vector<FiberState> box_initial_states(const MicroConfig& cfg, std::uint64_t first_fiber, std::size_t count) {
    const Philox rng(cfg.seed);
    std::vector<FiberState> out(count);
    for (std::size_t k = 0; k < count; ++k) {
        out[k].x = uniform_in_box(rng, first_fiber + k, cfg.dim, 1.0);
        out[k].tau = uniform_direction(rng, first_fiber + k, cfg.dim, true);
    }
    return out;
}

namespace {

std::vector<Vec3> positions_of(std::span<const FiberState> states) {
    std::vector<Vec3> out(states.size());
    for (std::size_t k = 0; k < states.size(); ++k) out[k] = states[k].x;
    return out;
}

}  // namespace

EnsembleResult run_ensemble(const MicroConfig& cfg, std::span<const FiberState> initial) {
    cfg.validate();
    const std::size_t total = cfg.total_fibers();
    if (!initial.empty() && initial.size() != total)
        throw MismatchError("run_ensemble: initial states must have N * groups entries");

    EnsembleResult result;
    result.final_states = initial.empty() ? box_initial_states(cfg, 0, total)
                                          : std::vector<FiberState>(initial.begin(), initial.end());

    const std::int64_t steps = cfg.steps();
    std::vector<double> snapshot_times;
    if (cfg.snapshot_interval > 0.0)
        for (double s = 0.0; s <= cfg.T * (1.0 + 1e-12); s = snapshot_times.size() * cfg.snapshot_interval)
            snapshot_times.push_back(s);
    // Step at which each snapshot is taken: the first step time >= target.
    std::vector<std::int64_t> snapshot_steps;
    for (double s : snapshot_times)
        snapshot_steps.push_back(std::min<std::int64_t>(steps, static_cast<std::int64_t>(std::ceil(s / cfg.dt - 1e-9))));
    result.snapshots.resize(snapshot_times.size());
    for (std::size_t k = 0; k < snapshot_times.size(); ++k) {
        result.snapshots[k].t = std::min(cfg.T, snapshot_steps[k] * cfg.dt);
        result.snapshots[k].states.resize(total);
    }

    const Philox rng(cfg.seed);
    const bool parallel_groups = cfg.groups >= worker_count();

    auto run_group = [&](std::size_t g) {
        const std::size_t offset = g * static_cast<std::size_t>(cfg.N);
        std::span<FiberState> states(result.final_states.data() + offset, static_cast<std::size_t>(cfg.N));
        HistoryBuffer buffer(cfg.kernel, cfg.stride, cfg.dt);
        std::size_t next_snapshot = 0;
        auto maybe_snapshot = [&](std::int64_t step) {
            while (next_snapshot < snapshot_steps.size() && snapshot_steps[next_snapshot] == step) {
                std::copy(states.begin(), states.end(), result.snapshots[next_snapshot].states.begin() + offset);
                ++next_snapshot;
            }
        };
        maybe_snapshot(0);
        std::vector<Vec3> forces;
        for (std::int64_t n = 0; n < steps; ++n) {
            const double t = n * cfg.dt;
            const double h = std::min(cfg.dt, cfg.T - t);
            if (cfg.U) {
                if (!cfg.kernel.is_instantaneous() && buffer.due(n)) buffer.record(t, positions_of(states));
                forces = interaction_forces(t, states, buffer, *cfg.U, !parallel_groups);
            }
            em_step(states, t, n, h, cfg, forces, rng, offset);
            maybe_snapshot(n + 1);
        }
    };

    if (parallel_groups)
        parallel_for(static_cast<std::size_t>(cfg.groups), run_group);
    else
        for (std::size_t g = 0; g < static_cast<std::size_t>(cfg.groups); ++g) run_group(g);
    result.final_time = cfg.T;
    return result;
}

}  // namespace fiberfield
