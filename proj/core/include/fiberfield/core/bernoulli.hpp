#pragma once

#include <cmath>

namespace fiberfield {

/// Bernoulli function z / (e^z - 1), B(0) = 1. Weights of exponentially fitted fluxes.
inline double bernoulli(double z) {
    if (std::abs(z) < 1e-6) return 1.0 - 0.5 * z + z * z / 12.0;
    return z / std::expm1(z);
}

}  // namespace fiberfield
