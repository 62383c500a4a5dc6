#include "fiberfield/core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fiberfield {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

double to_unit(std::uint32_t u) { return (static_cast<double>(u) + 0.5) * (1.0 / 4294967296.0); }

}  // namespace

Philox::Counter Philox::operator()(Counter c) const {
    std::uint32_t k0 = key_[0];
    std::uint32_t k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
        c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0, static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1, static_cast<std::uint32_t>(p0)};
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return c;
}

std::array<double, 4> Philox::uniforms(std::uint64_t stream, std::uint64_t step) const {
    const Counter out = (*this)({static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                                 static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32)});
    return {to_unit(out[0]), to_unit(out[1]), to_unit(out[2]), to_unit(out[3])};
}

std::array<double, 4> Philox::normals(std::uint64_t stream, std::uint64_t step) const {
    const auto u = uniforms(stream, step);
    const double r0 = std::sqrt(-2.0 * std::log(u[0]));
    const double r1 = std::sqrt(-2.0 * std::log(u[2]));
    const double a0 = 2.0 * std::numbers::pi * u[1];
    const double a1 = 2.0 * std::numbers::pi * u[3];
    return {r0 * std::cos(a0), r0 * std::sin(a0), r1 * std::cos(a1), r1 * std::sin(a1)};
}

namespace {

std::uint64_t stream_id(std::uint64_t index, RngPurpose purpose) {
    return (index << 2) | static_cast<std::uint64_t>(purpose);
}

}  // namespace

Vec3 gaussian_vector(const Philox& rng, std::uint64_t fiber, std::uint64_t step, int dim) {
    const auto g = rng.normals(stream_id(fiber, RngPurpose::noise), step);
    return {g[0], g[1], dim == 3 ? g[2] : 0.0};
}

Vec3 uniform_direction(const Philox& rng, std::uint64_t index, int dim, bool upper_half) {
    const auto u = rng.uniforms(stream_id(index, RngPurpose::initial_tangent), 0);
    if (dim == 2) {
        const double angle = (upper_half ? 1.0 : 2.0) * std::numbers::pi * u[0];
        return {std::cos(angle), std::sin(angle), 0.0};
    }
    const double z = upper_half ? u[0] : 2.0 * u[0] - 1.0;
    const double phi = 2.0 * std::numbers::pi * u[1];
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(phi), r * std::sin(phi), z};
}

Vec3 uniform_in_box(const Philox& rng, std::uint64_t index, int dim, double a) {
    const auto u = rng.uniforms(stream_id(index, RngPurpose::initial_position), 0);
    return {a * (2.0 * u[0] - 1.0), a * (2.0 * u[1] - 1.0), dim == 3 ? a * (2.0 * u[2] - 1.0) : 0.0};
}

}  // namespace fiberfield
