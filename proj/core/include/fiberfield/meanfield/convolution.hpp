#pragma once

#include <array>
#include <deque>
#include <span>
#include <vector>

#include "fiberfield/core/delay.hpp"
#include "fiberfield/core/potentials.hpp"
#include "fiberfield/core/spatial_grid.hpp"

namespace fiberfield {

enum class ConvolutionKind { gradient, value };

/// Midpoint-rule convolution restricted to relevant grid offsets.
///
/// On an equidistant grid the neighbour list of every point is the same set
/// of offsets, so it is stored once. An offset is kept when its kernel
/// magnitude exceeds threshold_frac times the largest magnitude occurring on
/// the grid; threshold_frac = 0 keeps every offset (the full sum).
struct ConvolutionStencil {
    SpatialGrid grid;
    InteractionPotential U;
    double threshold_frac = 0.0;
    ConvolutionKind kind = ConvolutionKind::gradient;
    std::vector<std::array<int, 3>> offsets;
    std::vector<double> weights;  // components() per offset, dx^d included

    int components() const { return kind == ConvolutionKind::gradient ? 3 : 1; }
    bool matches(const SpatialGrid& g, const InteractionPotential& u, double threshold) const {
        return grid == g && U == u && threshold_frac == threshold;
    }
};

ConvolutionStencil build_convolution_stencil(const SpatialGrid& grid, const InteractionPotential& U,
                                             double threshold_frac, ConvolutionKind kind);

/// Flat result, components() values per grid point.
std::vector<double> convolve(const ConvolutionStencil& stencil, std::span<const double> rho);

/// Per-step convolution fields and their delay average.
///
/// H = infinity keeps a running sum; finite H keeps a window of recent fields;
/// H = 0 keeps only the latest field.
class ForceFieldCache {
public:
    ForceFieldCache(ConvolutionStencil stencil, DelayKernel kernel);

    const ConvolutionStencil& stencil() const { return stencil_; }
    const DelayKernel& kernel() const { return kernel_; }
    std::size_t recorded() const { return count_; }

    /// Convolves rho and records the result at time t.
    const std::vector<double>& record(double t, const DensityField& rho);
    /// Records a precomputed field (components() values per point).
    void record_field(double t, std::vector<double> field);

    /// Uniform mean of the recorded fields whose time lies in [t - h(t), t];
    /// the newest field when the window holds none. Throws InvalidStateError
    /// when nothing was recorded.
    std::vector<double> average(double t) const;
    const std::vector<double>& latest() const;

private:
    ConvolutionStencil stencil_;
    DelayKernel kernel_;
    std::size_t count_ = 0;
    std::vector<double> running_sum_;
    std::deque<std::pair<double, std::vector<double>>> window_;
};

/// Convolution grad U * rho at every grid point. Throws MismatchError when the
/// cache was built for a different grid, potential or threshold.
std::vector<Vec3> convolution_force(const DensityField& rho, const InteractionPotential& U, double threshold_frac,
                                    const ForceFieldCache& cache);

/// Delay average of the cached convolution fields as vectors.
std::vector<Vec3> retarded_force_average(const ForceFieldCache& cache, double t);

std::vector<Vec3> to_vectors(std::span<const double> flat);

}  // namespace fiberfield
