#include "fiberfield/core/tangent.hpp"

#include <cmath>
#include <sstream>

#include "fiberfield/core/error.hpp"

namespace fiberfield {

Vec3 project_tangent(const Vec3& tau, const Vec3& v) {
    const double len = norm(tau);
    if (!(std::abs(len - 1.0) <= kUnitTolerance)) {
        std::ostringstream msg;
        msg << "project_tangent: |tau| = " << len << " is not a unit vector";
        throw InvalidStateError(msg.str());
    }
    return project_tangent_unchecked(tau, v);
}

}  // namespace fiberfield
