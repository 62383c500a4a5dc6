#include "fiberfield/verify/mean_field_limit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "fiberfield/core/error.hpp"
#include "fiberfield/core/rng.hpp"
#include "fiberfield/core/tangent.hpp"

namespace fiberfield {

void DeterministicConfig::validate() const {
    if (dim != 2 && dim != 3) throw ConfigError("verify: dim must be 2 or 3");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("verify: dt must be positive");
    kernel.validate();
    if (U) U->validate();
    if (stride < 1) throw ConfigError("verify: stride must be >= 1");
}

void VerifyConfig::validate() const {
    physics.validate();
    if (N_list.size() < 2) throw ConfigError("verify: N_list needs at least two sizes");
    for (std::size_t k = 0; k < N_list.size(); ++k) {
        if (N_list[k] < 1) throw ConfigError("verify: N_list entries must be >= 1");
        if (k > 0 && N_list[k] <= N_list[k - 1]) throw ConfigError("verify: N_list must be increasing");
    }
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("verify: T must be positive");
    if (seeds < 1) throw ConfigError("verify: seeds must be >= 1");
    if (lipschitz_samples < 1) throw ConfigError("verify: lipschitz_samples must be >= 1");
}

namespace {

Vec3 tangent_part(const Vec3& tau, const Vec3& v) { return v - tau * (dot(tau, v) / norm2(tau)); }

std::vector<Vec3> positions_of(std::span<const FiberState> states) {
    std::vector<Vec3> out(states.size());
    for (std::size_t k = 0; k < states.size(); ++k) out[k] = states[k].x;
    return out;
}

// Time derivative of every state for the given interaction forces.
void rates(std::span<const FiberState> s, std::span<const Vec3> forces, const DeterministicConfig& cfg,
           std::vector<FiberState>& out) {
    const double scale = 1.0 / (cfg.dim - 1.0);
    for (std::size_t k = 0; k < s.size(); ++k) {
        Vec3 g = cfg.V.gradient(s[k].x);
        if (!forces.empty()) g += forces[k];
        out[k].x = s[k].tau;
        out[k].tau = -scale * tangent_part(s[k].tau, g);
    }
}

std::vector<Vec3> forces_at(double t, std::span<const FiberState> s, const DeterministicConfig& cfg,
                            const HistoryBuffer& buffer) {
    if (!cfg.U) return {};
    return interaction_forces(t, s, buffer, *cfg.U, true);
}

}  // namespace

DeterministicStepReport deterministic_step(std::span<FiberState> states, double t, double dt,
                                           const DeterministicConfig& cfg, const HistoryBuffer& buffer) {
    const std::size_t n = states.size();
    std::vector<FiberState> k1(n);
    rates(states, forces_at(t, states, cfg, buffer), cfg, k1);
    std::vector<FiberState> next(states.begin(), states.end());
    if (cfg.scheme == Integrator::euler) {
        for (std::size_t i = 0; i < n; ++i) {
            next[i].x += dt * k1[i].x;
            next[i].tau += dt * k1[i].tau;
        }
    } else {
        std::vector<FiberState> k2(n), k3(n), k4(n), stage(n);
        auto make_stage = [&](const std::vector<FiberState>& k, double h) {
            for (std::size_t i = 0; i < n; ++i) {
                stage[i].x = states[i].x + h * k[i].x;
                stage[i].tau = states[i].tau + h * k[i].tau;
            }
        };
        make_stage(k1, 0.5 * dt);
        rates(stage, forces_at(t + 0.5 * dt, stage, cfg, buffer), cfg, k2);
        make_stage(k2, 0.5 * dt);
        rates(stage, forces_at(t + 0.5 * dt, stage, cfg, buffer), cfg, k3);
        make_stage(k3, dt);
        rates(stage, forces_at(t + dt, stage, cfg, buffer), cfg, k4);
        for (std::size_t i = 0; i < n; ++i) {
            next[i].x += dt / 6.0 * (k1[i].x + 2.0 * k2[i].x + 2.0 * k3[i].x + k4[i].x);
            next[i].tau += dt / 6.0 * (k1[i].tau + 2.0 * k2[i].tau + 2.0 * k3[i].tau + k4[i].tau);
        }
    }
    DeterministicStepReport report;
    for (std::size_t i = 0; i < n; ++i) {
        report.max_norm_drift = std::max(report.max_norm_drift, std::abs(norm(next[i].tau) - 1.0));
        next[i].tau = normalized(next[i].tau);
        if (!is_finite(next[i].x) || !is_finite(next[i].tau)) {
            std::ostringstream msg;
            msg << "deterministic_step: non-finite state for particle " << i << " at t=" << t;
            throw InvalidStateError(msg.str());
        }
        states[i] = next[i];
    }
    return report;
}

Trajectory evolve_deterministic(const DeterministicConfig& cfg, std::vector<FiberState> initial, double T,
                                std::span<const double> output_times) {
    cfg.validate();
    const auto steps = static_cast<std::int64_t>(std::ceil(T / cfg.dt - 1e-9));
    std::vector<std::int64_t> wanted;
    for (double s : output_times) wanted.push_back(std::min<std::int64_t>(steps, std::llround(s / cfg.dt)));

    HistoryBuffer buffer(cfg.kernel, cfg.stride, cfg.dt);
    Trajectory traj;
    auto emit = [&](std::int64_t step, double t) {
        for (std::int64_t w : wanted)
            if (w == step) {
                traj.times.push_back(t);
                traj.states.push_back(initial);
                break;
            }
    };
    double t = 0.0;
    for (std::int64_t step = 0;; ++step) {
        if (buffer.due(step)) buffer.record(t, positions_of(initial));
        emit(step, t);
        if (step == steps) break;
        const double h = std::min(cfg.dt, T - t);
        const auto r = deterministic_step(initial, t, h, cfg, buffer);
        traj.max_norm_drift = std::max(traj.max_norm_drift, r.max_norm_drift);
        t = step + 1 == steps ? T : t + h;
        for (const auto& s : initial) traj.max_unit_error = std::max(traj.max_unit_error, std::abs(norm(s.tau) - 1.0));
    }
    return traj;
}

double estimate_lipschitz(const DeterministicConfig& cfg, double radius, std::size_t samples, std::uint64_t seed) {
    const Philox rng(seed);
    const int d = cfg.dim;
    const double scale = 1.0 / (d - 1.0);
    struct Sample {
        Vec3 x, tau, y;
    };
    auto draw = [&](std::uint64_t index) {
        return Sample{uniform_in_box(rng, 3 * index, d, radius), uniform_direction(rng, 3 * index + 1, d, false),
                      uniform_in_box(rng, 3 * index + 2, d, radius)};
    };
    auto field = [&](const Sample& s, Vec3& dx, Vec3& dtau) {
        Vec3 g = cfg.V.gradient(s.x);
        if (cfg.U) g += cfg.U->gradient(s.x - s.y);
        dx = s.tau;
        dtau = -scale * project_tangent_unchecked(s.tau, g);
    };
    double best = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        Sample a = draw(2 * k);
        Sample b = draw(2 * k + 1);
        // Half of the pairs are close, to probe local slopes.
        if (k % 2 == 1) {
            const double eps = 1e-3;
            b.x = a.x + eps * (b.x * (1.0 / radius));
            b.y = a.y + eps * (b.y * (1.0 / radius));
            b.tau = normalized(a.tau + eps * b.tau);
        }
        Vec3 ax, at, bx, bt;
        field(a, ax, at);
        field(b, bx, bt);
        const double num = std::sqrt(norm2(ax - bx) + norm2(at - bt));
        const double den = std::sqrt(norm2(a.x - b.x) + norm2(a.tau - b.tau) + norm2(a.y - b.y));
        if (den > 0.0) best = std::max(best, num / den);
    }
    return best;
}

double stability_bound(double lipschitz, double T) {
    const double c = std::max(1.0, lipschitz);
    return c * (1.0 + T) * std::exp(c * T);
}

std::vector<FiberState> sample_initial(int dim, int N, std::uint64_t seed) {
    MicroConfig m;
    m.dim = dim;
    m.seed = seed;
    return box_initial_states(m, 0, static_cast<std::size_t>(N));
}

namespace {

// Sampling radius covering every position reachable from the box by time T.
double reach_radius(int dim, double T) { return std::sqrt(static_cast<double>(dim)) + T; }

}  // namespace

VerifyReport convergence_study(const VerifyConfig& cfg) {
    cfg.validate();
    const int d = cfg.physics.dim;
    VerifyReport report;
    report.lipschitz = estimate_lipschitz(cfg.physics, reach_radius(d, cfg.T), cfg.lipschitz_samples, cfg.seed);
    const double times[] = {0.0, 0.5 * cfg.T, cfg.T};
    for (int s = 0; s < cfg.seeds; ++s) {
        const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(s);
        std::vector<Trajectory> runs;
        for (std::size_t k = 0; k < cfg.N_list.size(); ++k) {
            // Independent draws use a distinct stream per size.
            const std::uint64_t run_seed = cfg.coupled ? seed : seed + 1000003ULL * (k + 1);
            runs.push_back(evolve_deterministic(cfg.physics, sample_initial(d, cfg.N_list[k], run_seed), cfg.T, times));
            report.max_unit_error = std::max(report.max_unit_error, runs.back().max_unit_error);
            report.max_norm_drift = std::max(report.max_norm_drift, runs.back().max_norm_drift);
        }
        for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
            double w0 = 0.0, sup = 0.0;
            for (std::size_t m = 0; m < runs[k].times.size(); ++m) {
                const auto a = EmpiricalMeasure::from_states(runs[k].states[m], d);
                const auto b = EmpiricalMeasure::from_states(runs[k + 1].states[m], d);
                const double w = wasserstein1_resampled(a, b);
                if (m == 0) w0 = w;
                sup = std::max(sup, w);
                VerifyRow row;
                row.seed = seed;
                row.N_a = cfg.N_list[k];
                row.N_b = cfg.N_list[k + 1];
                row.t = runs[k].times[m];
                row.W1 = w;
                row.bound = stability_bound(report.lipschitz, row.t);
                row.ratio = w0 > 0.0 ? sup / w0 : (sup == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
                report.rows.push_back(row);
            }
        }
    }
    return report;
}

StabilityCheck stability_check(const DeterministicConfig& cfg, int N, double T, std::uint64_t seed_a,
                               std::uint64_t seed_b, std::size_t lipschitz_samples) {
    cfg.validate();
    const auto steps = static_cast<std::int64_t>(std::ceil(T / cfg.dt - 1e-9));
    std::vector<double> times;
    for (std::int64_t k = 0; k <= steps; ++k) times.push_back(std::min(T, k * cfg.dt));
    const auto a = evolve_deterministic(cfg, sample_initial(cfg.dim, N, seed_a), T, times);
    const auto b = evolve_deterministic(cfg, sample_initial(cfg.dim, N, seed_b), T, times);
    StabilityCheck out;
    for (std::size_t m = 0; m < a.times.size(); ++m)
        out.w1.push_back(wasserstein1(EmpiricalMeasure::from_states(a.states[m], cfg.dim),
                                      EmpiricalMeasure::from_states(b.states[m], cfg.dim)));
    if (out.w1.front() == 0.0) throw InvalidStateError("stability_check: initial measures coincide");
    out.ratio = *std::max_element(out.w1.begin(), out.w1.end()) / out.w1.front();
    out.lipschitz = estimate_lipschitz(cfg, reach_radius(cfg.dim, T), lipschitz_samples, seed_a ^ (seed_b << 17));
    out.bound = stability_bound(out.lipschitz, T);
    return out;
}

void write_verify_csv(std::ostream& out, const VerifyReport& report) {
    out << "seed,N_a,N_b,t,W1,bound,ratio\n";
    char buf[256];
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%llu,%d,%d,%.17g,%.17g,%.17g,%.17g\n", static_cast<unsigned long long>(r.seed),
                      r.N_a, r.N_b, r.t, r.W1, r.bound, r.ratio);
        out << buf;
    }
}

}  // namespace fiberfield
