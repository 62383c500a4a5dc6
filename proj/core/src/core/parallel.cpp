#include "fiberfield/core/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace fiberfield {

namespace {

std::atomic<int> g_override{0};

int default_workers() {
    if (const char* env = std::getenv("FIBERFIELD_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) return v;
        } catch (...) {
        }
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace

int worker_count() {
    const int o = g_override.load(std::memory_order_relaxed);
    if (o > 0) return o;
    static const int workers = default_workers();
    return workers;
}

void set_worker_count(int workers) { g_override.store(workers > 0 ? workers : 0, std::memory_order_relaxed); }

}  // namespace fiberfield
