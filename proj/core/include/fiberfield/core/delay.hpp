#pragma once

#include <limits>
#include <utility>

namespace fiberfield {

/// Cut-off kernel h(t) = min(t, H) of the retarded interaction.
///
/// H = infinity recovers h(t) = t (full history), H = 0 the instantaneous
/// (non-retarded) interaction.
struct DelayKernel {
    double cutoff = std::numeric_limits<double>::infinity();

    static DelayKernel infinite() { return {}; }
    static DelayKernel finite(double h) { return {h}; }

    bool is_infinite() const { return cutoff == std::numeric_limits<double>::infinity(); }
    bool is_instantaneous() const { return cutoff == 0.0; }
    double h(double t) const { return t < cutoff ? t : cutoff; }

    /// Throws ConfigError for negative or NaN cut-off.
    void validate() const;

    friend bool operator==(const DelayKernel&, const DelayKernel&) = default;
};

/// Integration window [t - h(t), t]. Degenerate (0, 0) at t = 0.
std::pair<double, double> delay_window(double t, const DelayKernel& kernel);

}  // namespace fiberfield
