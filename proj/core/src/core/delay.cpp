#include "fiberfield/core/delay.hpp"

#include <cmath>

#include "fiberfield/core/error.hpp"

namespace fiberfield {

void DelayKernel::validate() const {
    if (std::isnan(cutoff) || cutoff < 0.0) throw ConfigError("delay kernel: cut-off H must be >= 0");
}

std::pair<double, double> delay_window(double t, const DelayKernel& kernel) {
    if (t <= 0.0) return {0.0, 0.0};
    return {t - kernel.h(t), t};
}

}  // namespace fiberfield
