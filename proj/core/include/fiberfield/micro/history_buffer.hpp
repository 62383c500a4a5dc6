#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <utility>
#include <vector>

#include "fiberfield/core/delay.hpp"
#include "fiberfield/core/vec3.hpp"

namespace fiberfield {

/// Subsampled record of past fiber positions of one interacting group.
///
/// A record is taken every `stride` steps, starting with step 0. For finite H
/// records older than t - H - stride * dt are dropped; for H = infinity all
/// records are kept.
class HistoryBuffer {
public:
    struct Entry {
        double time = 0.0;
        std::vector<Vec3> positions;
    };

    HistoryBuffer() = default;
    HistoryBuffer(DelayKernel kernel, int stride, double dt);

    const DelayKernel& kernel() const { return kernel_; }
    int stride() const { return stride_; }
    /// Maximum number of retained entries, 0 when unbounded.
    std::size_t capacity() const { return capacity_; }

    bool due(std::int64_t step) const { return step % stride_ == 0; }

    /// Appends positions at time t. Throws InvalidStateError unless t is
    /// strictly later than the newest entry.
    void record(double t, std::span<const Vec3> positions);

    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }
    const Entry& operator[](std::size_t k) const { return entries_[k]; }
    const Entry& newest() const { return entries_.back(); }

    /// Entries [first, last) averaged at time t: those inside [t - h(t), t],
    /// or the newest entry alone when the window contains none.
    std::pair<std::size_t, std::size_t> window(double t) const;

private:
    DelayKernel kernel_;
    int stride_ = 1;
    double dt_ = 1.0;
    std::size_t capacity_ = 0;
    std::deque<Entry> entries_;
};

}  // namespace fiberfield
