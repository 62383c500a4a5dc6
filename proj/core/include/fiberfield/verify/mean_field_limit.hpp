#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "fiberfield/micro/fiber_system.hpp"
#include "fiberfield/verify/wasserstein.hpp"

namespace fiberfield {

enum class Integrator { euler, rk4 };

/// Deterministic retarded particle system (the micro model with A = 0).
struct DeterministicConfig {
    int dim = 3;
    double dt = 0.01;
    DelayKernel kernel;
    CoilingPotential V;
    std::optional<InteractionPotential> U;
    int stride = 1;
    Integrator scheme = Integrator::euler;

    void validate() const;
};

struct DeterministicStepReport {
    /// max | |tau| - 1 | before renormalisation.
    double max_norm_drift = 0.0;
};

/// One step of dx = tau dt, dtau = -(1/(d-1)) P_tau (grad V + retarded grad U * mu) dt.
///
/// The retarded interaction is averaged over `buffer` as in the micro model.
/// RK4 stages evaluate it at the stage positions with the history window of
/// the stage time; P_tau v = v - tau (tau.v) / |tau|^2 keeps each stage
/// tangent to the sphere. Tangents are renormalised after the step.
DeterministicStepReport deterministic_step(std::span<FiberState> states, double t, double dt,
                                           const DeterministicConfig& cfg, const HistoryBuffer& buffer);

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<FiberState>> states;
    double max_norm_drift = 0.0;
    double max_unit_error = 0.0;  // max | |tau| - 1 | after renormalisation
};

/// Evolves one interacting system to T and keeps the states at the requested
/// output times (rounded to the step grid).
Trajectory evolve_deterministic(const DeterministicConfig& cfg, std::vector<FiberState> initial, double T,
                                std::span<const double> output_times);

/// Largest finite-difference quotient |G(z) - G(z')| / |z - z'| of the
/// single-particle vector field G(x, tau; y) = (tau, -(1/(d-1)) P_tau (grad V(x) + grad U(x - y)))
/// over `samples` random pairs with |x|, |y| <= radius.
double estimate_lipschitz(const DeterministicConfig& cfg, double radius, std::size_t samples, std::uint64_t seed);

/// c (1 + T) e^{cT} with c = max(1, lipschitz).
double stability_bound(double lipschitz, double T);

struct VerifyConfig {
    DeterministicConfig physics;
    std::vector<int> N_list{50, 100, 200, 400};
    double T = 2.0;
    int seeds = 5;
    std::uint64_t seed = 1;
    /// Consecutive sizes share their initial prefix; otherwise independent draws.
    bool coupled = true;
    std::size_t lipschitz_samples = 10000;

    void validate() const;
};

struct VerifyRow {
    std::uint64_t seed = 0;
    int N_a = 0;
    int N_b = 0;
    double t = 0.0;
    double W1 = 0.0;
    double bound = 0.0;
    double ratio = 0.0;  // sup_s W1(s) / W1(0) up to t
};

struct VerifyReport {
    std::vector<VerifyRow> rows;
    double lipschitz = 0.0;
    double max_unit_error = 0.0;
    double max_norm_drift = 0.0;
};

/// Box initial condition with N particles for seed `seed`; particle k only
/// depends on (seed, k), so smaller sizes are prefixes of larger ones.
std::vector<FiberState> sample_initial(int dim, int N, std::uint64_t seed);

/// For each seed and each pair of consecutive sizes evolves both systems and
/// reports W1 at t in {0, T/2, T} with the stability ratio and bound.
VerifyReport convergence_study(const VerifyConfig& cfg);

struct StabilityCheck {
    double ratio = 0.0;
    double bound = 0.0;
    double lipschitz = 0.0;
    std::vector<double> w1;  // at each step time
};

/// Two N-particle systems from seeds a and b: sup_t W1(mu_t, nu_t) / W1(mu_0, nu_0)
/// against c (1 + T) e^{cT}.
StabilityCheck stability_check(const DeterministicConfig& cfg, int N, double T, std::uint64_t seed_a,
                               std::uint64_t seed_b, std::size_t lipschitz_samples = 10000);

/// Header "seed,N_a,N_b,t,W1,bound,ratio".
void write_verify_csv(std::ostream& out, const VerifyReport& report);

}  // namespace fiberfield
