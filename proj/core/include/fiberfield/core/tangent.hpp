#pragma once

#include "fiberfield/core/vec3.hpp"

namespace fiberfield {

inline constexpr double kUnitTolerance = 1e-9;

/// (I - tau tau^T) v. Throws InvalidStateError if |tau| is not 1 within 1e-9.
Vec3 project_tangent(const Vec3& tau, const Vec3& v);

/// Unchecked projection for inner loops.
constexpr Vec3 project_tangent_unchecked(const Vec3& tau, const Vec3& v) {
    return v - tau * dot(tau, v);
}

}  // namespace fiberfield
