#pragma once

#include <array>
#include <cstdint>

#include "fiberfield/core/vec3.hpp"

namespace fiberfield {

/// Counter-based Philox4x32-10 generator.
///
/// Every draw is a pure function of (key, counter), so results do not depend
/// on thread scheduling or on the order in which streams are consumed.
class Philox {
public:
    using Counter = std::array<std::uint32_t, 4>;

    explicit Philox(std::uint64_t seed) : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    Counter operator()(Counter ctr) const;

    /// Four uniforms in (0, 1].
    std::array<double, 4> uniforms(std::uint64_t stream, std::uint64_t step) const;
    /// Four standard normals (Box-Muller on two uniform pairs).
    std::array<double, 4> normals(std::uint64_t stream, std::uint64_t step) const;

private:
    std::array<std::uint32_t, 2> key_;
};

/// Purpose tags keep independent quantities on disjoint counters.
enum class RngPurpose : std::uint32_t { noise = 0, initial_position = 1, initial_tangent = 2, sampling = 3 };

/// Normal increments for fiber `fiber` at time step `step`.
Vec3 gaussian_vector(const Philox& rng, std::uint64_t fiber, std::uint64_t step, int dim);

/// Uniform point on the unit sphere S^{dim-1}, upper half (last coordinate > 0) when `upper_half`.
Vec3 uniform_direction(const Philox& rng, std::uint64_t index, int dim, bool upper_half);

/// Uniform point in [-a, a]^dim.
Vec3 uniform_in_box(const Philox& rng, std::uint64_t index, int dim, double a);

}  // namespace fiberfield
