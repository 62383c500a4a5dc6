#include "fiberfield/micro/history_buffer.hpp"

#include <algorithm>
#include <cmath>

#include "fiberfield/core/error.hpp"

namespace fiberfield {

HistoryBuffer::HistoryBuffer(DelayKernel kernel, int stride, double dt) : kernel_(kernel), stride_(stride), dt_(dt) {
    kernel_.validate();
    if (stride < 1) throw ConfigError("history buffer: stride must be >= 1");
    if (!(dt > 0.0)) throw ConfigError("history buffer: dt must be positive");
    if (!kernel_.is_infinite()) capacity_ = static_cast<std::size_t>(std::ceil(kernel_.cutoff / (stride_ * dt_))) + 1;
}

void HistoryBuffer::record(double t, std::span<const Vec3> positions) {
    if (!entries_.empty() && !(t > entries_.back().time))
        throw InvalidStateError("history buffer: record times must increase strictly");
    entries_.push_back({t, std::vector<Vec3>(positions.begin(), positions.end())});
    if (!kernel_.is_infinite()) {
        const double oldest_allowed = t - kernel_.cutoff - stride_ * dt_;
        while (entries_.size() > 1 && entries_.front().time < oldest_allowed) entries_.pop_front();
        while (entries_.size() > capacity_) entries_.pop_front();
    }
}

std::pair<std::size_t, std::size_t> HistoryBuffer::window(double t) const {
    if (entries_.empty()) return {0, 0};
    const std::size_t n = entries_.size();
    if (kernel_.is_infinite()) return {0, n};
    const double start = t - kernel_.h(t);
    // Tolerance absorbs rounding in accumulated step times.
    const double eps = 1e-9 * dt_;
    std::size_t first = n;
    for (std::size_t k = 0; k < n; ++k)
        if (entries_[k].time >= start - eps) {
            first = k;
            break;
        }
    std::size_t last = first;
    while (last < n && entries_[last].time <= t + eps) ++last;
    if (first == last) return {n - 1, n};
    return {first, last};
}

}  // namespace fiberfield
