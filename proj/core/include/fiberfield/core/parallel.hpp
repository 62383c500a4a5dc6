#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fiberfield {

/// Worker count: FIBERFIELD_THREADS if set and positive, else the OpenMP default.
int worker_count();

/// Overrides the worker count for the remainder of the process.
void set_worker_count(int workers);

/// Runs body(i) for i in [0, n). Each index must write disjoint output; no
/// reductions happen here so results are independent of the worker count.
/// The first exception thrown by a body is rethrown after the loop.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
#ifdef _OPENMP
    const std::int64_t count = static_cast<std::int64_t>(n);
    std::exception_ptr failure;
    std::mutex failure_mutex;
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (std::int64_t i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
#else
    for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

}  // namespace fiberfield
