#include "fiberfield/meanfield/convolution.hpp"

#include <algorithm>
#include <cmath>

#include "fiberfield/core/error.hpp"
#include "fiberfield/core/parallel.hpp"

namespace fiberfield {

ConvolutionStencil build_convolution_stencil(const SpatialGrid& grid, const InteractionPotential& U,
                                             double threshold_frac, ConvolutionKind kind) {
    grid.validate();
    U.validate();
    if (!(threshold_frac >= 0.0 && threshold_frac < 1.0))
        throw ConfigError("convolution: threshold_frac must lie in [0, 1)");
    ConvolutionStencil s{grid, U, threshold_frac, kind, {}, {}};
    const int r = grid.n - 1;
    const int rz = grid.dim == 3 ? r : 0;
    const double dx = grid.dx();
    const double vol = grid.cell_volume();

    struct Candidate {
        std::array<int, 3> offset;
        Vec3 g;
        double magnitude;
    };
    std::vector<Candidate> all;
    double largest = 0.0;
    for (int i = -r; i <= r; ++i)
        for (int j = -r; j <= r; ++j)
            for (int k = -rz; k <= rz; ++k) {
                const Vec3 x{i * dx, j * dx, k * dx};
                Candidate c{{i, j, k}, {}, 0.0};
                if (kind == ConvolutionKind::gradient) {
                    c.g = U.gradient(x);
                    c.magnitude = norm(c.g);
                } else {
                    c.g.x = U.value(x);
                    c.magnitude = std::abs(c.g.x);
                }
                largest = std::max(largest, c.magnitude);
                all.push_back(c);
            }
    const double cut = threshold_frac * largest;
    for (const auto& c : all) {
        if (c.magnitude == 0.0 || c.magnitude <= cut) continue;
        s.offsets.push_back(c.offset);
        if (kind == ConvolutionKind::gradient) {
            s.weights.push_back(c.g.x * vol);
            s.weights.push_back(c.g.y * vol);
            s.weights.push_back(c.g.z * vol);
        } else {
            s.weights.push_back(c.g.x * vol);
        }
    }
    return s;
}

std::vector<double> convolve(const ConvolutionStencil& stencil, std::span<const double> rho) {
    const SpatialGrid& g = stencil.grid;
    if (rho.size() != g.size()) throw MismatchError("convolve: density size does not match the stencil grid");
    const int n = g.n;
    const int nz = g.dim == 3 ? n : 1;
    const int comps = stencil.components();
    std::vector<double> out(g.size() * comps, 0.0);
    // out(x) = sum_o w(o) rho(x - o): the kernel is evaluated at x - y = o.
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t iu) {
        const int i = static_cast<int>(iu);
        for (std::size_t o = 0; o < stencil.offsets.size(); ++o) {
            const auto [di, dj, dk] = stencil.offsets[o];
            const int si = i - di;
            if (si < 0 || si >= n) continue;
            const int j0 = std::max(0, dj), j1 = std::min(n, n + dj);
            const int k0 = std::max(0, dk), k1 = std::min(nz, nz + dk);
            const double* w = stencil.weights.data() + o * comps;
            for (int j = j0; j < j1; ++j) {
                const std::size_t row = (static_cast<std::size_t>(i) * n + j) * nz;
                const std::size_t src = (static_cast<std::size_t>(si) * n + (j - dj)) * nz;
                if (comps == 3) {
                    for (int k = k0; k < k1; ++k) {
                        const double r = rho[src + k - dk];
                        double* dst = out.data() + 3 * (row + k);
                        dst[0] += w[0] * r;
                        dst[1] += w[1] * r;
                        dst[2] += w[2] * r;
                    }
                } else {
                    for (int k = k0; k < k1; ++k) out[row + k] += w[0] * rho[src + k - dk];
                }
            }
        }
    });
    return out;
}

ForceFieldCache::ForceFieldCache(ConvolutionStencil stencil, DelayKernel kernel)
    : stencil_(std::move(stencil)), kernel_(kernel) {
    kernel_.validate();
}

const std::vector<double>& ForceFieldCache::record(double t, const DensityField& rho) {
    if (!(rho.grid == stencil_.grid)) throw MismatchError("force cache: density grid does not match the cache grid");
    record_field(t, convolve(stencil_, rho.values));
    return latest();
}

void ForceFieldCache::record_field(double t, std::vector<double> field) {
    if (field.size() != stencil_.grid.size() * stencil_.components())
        throw MismatchError("force cache: field size does not match the cache grid");
    if (!window_.empty() && !(t > window_.back().first))
        throw InvalidStateError("force cache: record times must increase strictly");
    if (kernel_.is_infinite()) {
        if (running_sum_.empty()) running_sum_.assign(field.size(), 0.0);
        for (std::size_t k = 0; k < field.size(); ++k) running_sum_[k] += field[k];
    }
    ++count_;
    window_.emplace_back(t, std::move(field));
    // Keep one field older than the window start so a window that falls between records still has a fallback.
    const double start = t - kernel_.h(t);
    if (kernel_.is_infinite())
        while (window_.size() > 1) window_.pop_front();
    else
        while (window_.size() > 1 && window_[1].first <= start) window_.pop_front();
}

const std::vector<double>& ForceFieldCache::latest() const {
    if (window_.empty()) throw InvalidStateError("force cache: no convolution field recorded");
    return window_.back().second;
}

std::vector<double> ForceFieldCache::average(double t) const {
    const auto& newest = latest();
    if (kernel_.is_infinite()) {
        std::vector<double> out(running_sum_);
        const double inv = 1.0 / static_cast<double>(count_);
        for (double& v : out) v *= inv;
        return out;
    }
    if (kernel_.is_instantaneous()) return newest;
    const double start = t - kernel_.h(t);
    const double eps = 1e-12 * std::max(1.0, std::abs(t));
    std::vector<double> out(newest.size(), 0.0);
    std::size_t used = 0;
    for (const auto& [time, field] : window_) {
        if (time < start - eps || time > t + eps) continue;
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += field[k];
        ++used;
    }
    if (used == 0) return newest;
    const double inv = 1.0 / static_cast<double>(used);
    for (double& v : out) v *= inv;
    return out;
}

std::vector<Vec3> to_vectors(std::span<const double> flat) {
    std::vector<Vec3> out(flat.size() / 3);
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = {flat[3 * p], flat[3 * p + 1], flat[3 * p + 2]};
    return out;
}

std::vector<Vec3> convolution_force(const DensityField& rho, const InteractionPotential& U, double threshold_frac,
                                    const ForceFieldCache& cache) {
    const auto& s = cache.stencil();
    if (s.kind != ConvolutionKind::gradient || !s.matches(rho.grid, U, threshold_frac))
        throw MismatchError("convolution_force: cache was built for a different grid, potential or threshold");
    return to_vectors(convolve(s, rho.values));
}

std::vector<Vec3> retarded_force_average(const ForceFieldCache& cache, double t) {
    if (cache.stencil().kind != ConvolutionKind::gradient)
        throw MismatchError("retarded_force_average: cache does not hold gradient fields");
    return to_vectors(cache.average(t));
}

}  // namespace fiberfield
