#include "fiberfield/verify/wasserstein.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "fiberfield/core/error.hpp"

namespace fiberfield {

EmpiricalMeasure::EmpiricalMeasure(int d, std::vector<double> c) : dim(d), coords(std::move(c)) {
    if (dim <= 0) throw ConfigError("empirical measure: dimension must be positive");
    if (coords.size() % dim != 0) throw MismatchError("empirical measure: coordinate count is not a multiple of dim");
}

EmpiricalMeasure EmpiricalMeasure::from_states(std::span<const FiberState> states, int d) {
    std::vector<double> c;
    c.reserve(states.size() * 2 * d);
    for (const auto& s : states) {
        for (int a = 0; a < d; ++a) c.push_back(s.x[a]);
        for (int a = 0; a < d; ++a) c.push_back(s.tau[a]);
    }
    return {2 * d, std::move(c)};
}

EmpiricalMeasure EmpiricalMeasure::replicated(std::size_t times) const {
    std::vector<double> c;
    c.reserve(coords.size() * times);
    for (std::size_t i = 0; i < size(); ++i)
        for (std::size_t r = 0; r < times; ++r) c.insert(c.end(), point(i).begin(), point(i).end());
    return {dim, std::move(c)};
}

double truncated_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::min(1.0, std::sqrt(s));
}

double wasserstein1(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    if (mu.dim != nu.dim) throw MismatchError("wasserstein1: dimensions differ");
    if (mu.size() != nu.size()) throw MismatchError("wasserstein1: point counts differ; resample first");
    const std::size_t n = mu.size();
    if (n == 0) throw MismatchError("wasserstein1: empty measures");

    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = truncated_distance(mu.point(i), nu.point(j));

    // Shortest augmenting path with row/column potentials; rows and columns are 1-based, 0 is a sentinel.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    double total = 0.0;
    for (std::size_t j = 1; j <= n; ++j) total += cost[(match[j] - 1) * n + (j - 1)];
    return total / static_cast<double>(n);
}

double wasserstein1_resampled(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, std::size_t max_points) {
    if (mu.size() == 0 || nu.size() == 0) throw MismatchError("wasserstein1: empty measures");
    const std::size_t common = std::lcm(mu.size(), nu.size());
    if (common > max_points) throw ConfigError("wasserstein1: common resampling size exceeds the exact-solver cap");
    return wasserstein1(mu.replicated(common / mu.size()), nu.replicated(common / nu.size()));
}

}  // namespace fiberfield
