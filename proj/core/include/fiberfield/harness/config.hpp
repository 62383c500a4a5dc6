#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fiberfield/core/delay.hpp"
#include "fiberfield/core/potentials.hpp"
#include "fiberfield/macro/diffusion_limit.hpp"
#include "fiberfield/meanfield/solver.hpp"
#include "fiberfield/micro/fiber_system.hpp"
#include "fiberfield/stationary/fixed_point.hpp"
#include "fiberfield/verify/mean_field_limit.hpp"

namespace fiberfield {

enum class Mode { micro, meanfield, stationary, macro, verify, compare };

std::string to_string(Mode mode);
/// Throws ConfigError for unknown names.
Mode mode_from_string(const std::string& name);

struct PhysicsConfig {
    int d = 3;
    double A = 1.0;
    DelayKernel kernel;
    CoilingPotential V;
    std::optional<InteractionPotential> U = InteractionPotential::smooth_heaviside(10.0, 1.4, 10.0);

    friend bool operator==(const PhysicsConfig&, const PhysicsConfig&) = default;
};

struct NumericsConfig {
    double dt = 0.01;  // micro and verify step
    double T = 10.0;
    int n_x = 21;
    double L = 7.0;
    int level = 1;
    int stride = 10;
    double tol = 1e-8;
    int max_iter = 500;
    double relaxation = 0.5;
    int N = 500;
    int groups = 20;
    std::uint64_t seed = 1;
    double threshold_frac = 1e-3;
    double cfl_safety = 0.5;
    double meanfield_dt = 0.0;  // 0: from the CFL limit
    double macro_dt = 0.0;      // 0: from the CFL limit

    friend bool operator==(const NumericsConfig&, const NumericsConfig&) = default;
};

struct OutputConfig {
    std::string dir = "out";
    /// Physical time between snapshots and distance-series samples; 0 disables them.
    double snapshot_interval = 1.0;
    int radial_bins = 40;

    friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct VerifySection {
    std::vector<int> N_list{50, 100, 200, 400};
    double T = 2.0;
    int seeds = 5;
    bool coupled = true;
    Integrator scheme = Integrator::euler;

    friend bool operator==(const VerifySection&, const VerifySection&) = default;
};

struct CompareSection {
    /// Names resolved to <dir>/<name>_density.csv.
    std::vector<std::string> inputs{"micro", "meanfield"};

    friend bool operator==(const CompareSection&, const CompareSection&) = default;
};

/// One document drives every scale.
struct ExperimentConfig {
    std::string preset = "paper";
    PhysicsConfig physics;
    NumericsConfig numerics;
    std::string initial = "box";
    OutputConfig output;
    VerifySection verify;
    CompareSection compare;

    /// Throws ConfigError naming the offending key path.
    void validate() const;

    SpatialGrid grid() const;
    MicroConfig micro() const;
    MeanFieldConfig meanfield() const;
    StationaryProblem stationary() const;
    MacroConfig macro() const;
    VerifyConfig verification() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Defaults of a named preset: "paper" (k = 10, C = 10, R = 1.4, V = |x|^2 / 2)
/// or "free" (no interaction).
ExperimentConfig preset_config(const std::string& name);

/// Parses a JSON document. The preset named by "preset" supplies every value
/// the document leaves out. Unknown keys, wrong types and out-of-range values
/// throw ConfigError with the key path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Full JSON echo of every effective value; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace fiberfield
