#pragma once

#include <span>
#include <vector>

#include "fiberfield/micro/fiber_system.hpp"

namespace fiberfield {

/// Equal-weight point cloud in R^m.
struct EmpiricalMeasure {
    int dim = 0;
    std::vector<double> coords;  // size() * dim values, point-major

    EmpiricalMeasure() = default;
    EmpiricalMeasure(int dim, std::vector<double> coords);

    std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
    std::span<const double> point(std::size_t i) const { return {coords.data() + i * dim, static_cast<std::size_t>(dim)}; }

    /// (x, tau) stacked into R^{2d}.
    static EmpiricalMeasure from_states(std::span<const FiberState> states, int d);
    /// Every point repeated `times` times; the measure is unchanged.
    EmpiricalMeasure replicated(std::size_t times) const;
};

/// Truncated ground cost min(1, |a - b|).
double truncated_distance(std::span<const double> a, std::span<const double> b);

/// Exact W1 under the truncated cost: optimal assignment (Hungarian method,
/// O(N^3)) divided by N. Throws MismatchError for unequal sizes or dimensions.
double wasserstein1(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

/// W1 for unequal sizes, both measures replicated to lcm(N_a, N_b) points.
/// Throws ConfigError when the common size exceeds `max_points`.
double wasserstein1_resampled(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, std::size_t max_points = 2000);

}  // namespace fiberfield
