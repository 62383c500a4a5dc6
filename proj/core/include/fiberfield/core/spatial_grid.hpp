#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "fiberfield/core/vec3.hpp"

namespace fiberfield {

/// Equidistant grid on [-L, L]^dim with n points per axis (endpoints included).
/// Points are enumerated lexicographically with the first axis slowest.
struct SpatialGrid {
    int dim = 3;
    int n = 21;
    double half_width = 7.0;  // L

    SpatialGrid() = default;
    SpatialGrid(int dim, int n, double half_width);

    /// Throws ConfigError unless dim in {2, 3}, n >= 3, L > 0.
    void validate() const;

    double dx() const { return 2.0 * half_width / (n - 1); }
    double cell_volume() const;
    std::size_t size() const;
    double coordinate(int i) const { return -half_width + i * dx(); }

    std::size_t index(int i, int j, int k = 0) const {
        return dim == 3 ? (static_cast<std::size_t>(i) * n + j) * n + k
                        : static_cast<std::size_t>(i) * n + j;
    }
    std::array<int, 3> multi_index(std::size_t idx) const;
    Vec3 point(std::size_t idx) const;

    friend bool operator==(const SpatialGrid&, const SpatialGrid&) = default;
};

/// Spatial density sampled at grid points. Mass uses midpoint quadrature.
struct DensityField {
    SpatialGrid grid;
    std::vector<double> values;

    DensityField() = default;
    explicit DensityField(const SpatialGrid& g) : grid(g), values(g.size(), 0.0) {}
    DensityField(const SpatialGrid& g, std::vector<double> v);

    double mass() const;
    double max() const;
    /// Discrete L2 norm with cell-volume weights.
    double l2_norm() const;
};

/// ||a - b||_2 with cell-volume weights. Throws MismatchError on grid mismatch.
double l2_distance(const DensityField& a, const DensityField& b);

/// Second moment \int |x|^2 rho dx.
double second_moment(const DensityField& rho);

/// Root-mean-square difference over the region where max(a, b) exceeds
/// `support_frac` times the peak, divided by the peak. The peak is the larger
/// maximum of the two fields, so the metric is symmetric.
double rms_difference_relative_to_peak(const DensityField& a, const DensityField& b,
                                       double support_frac = 1e-3);

/// Normalised e^{-V} on the grid (the non-interacting stationary density).
DensityField boltzmann_density(const SpatialGrid& grid);

}  // namespace fiberfield
