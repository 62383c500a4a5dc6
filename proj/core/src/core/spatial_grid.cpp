#include "fiberfield/core/spatial_grid.hpp"

#include <algorithm>
#include <cmath>

#include "fiberfield/core/error.hpp"

namespace fiberfield {

SpatialGrid::SpatialGrid(int dim_, int n_, double half_width_) : dim(dim_), n(n_), half_width(half_width_) {
    validate();
}

void SpatialGrid::validate() const {
    if (dim != 2 && dim != 3) throw ConfigError("spatial grid: dimension must be 2 or 3");
    if (n < 3) throw ConfigError("spatial grid: n_x must be >= 3");
    if (!(std::isfinite(half_width) && half_width > 0.0)) throw ConfigError("spatial grid: L must be positive");
}

double SpatialGrid::cell_volume() const { return std::pow(dx(), dim); }

std::size_t SpatialGrid::size() const {
    std::size_t s = 1;
    for (int d = 0; d < dim; ++d) s *= static_cast<std::size_t>(n);
    return s;
}

std::array<int, 3> SpatialGrid::multi_index(std::size_t idx) const {
    const auto un = static_cast<std::size_t>(n);
    if (dim == 3) return {static_cast<int>(idx / (un * un)), static_cast<int>((idx / un) % un), static_cast<int>(idx % un)};
    return {static_cast<int>(idx / un), static_cast<int>(idx % un), 0};
}

Vec3 SpatialGrid::point(std::size_t idx) const {
    const auto m = multi_index(idx);
    Vec3 p{coordinate(m[0]), coordinate(m[1]), 0.0};
    if (dim == 3) p.z = coordinate(m[2]);
    return p;
}

DensityField::DensityField(const SpatialGrid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw MismatchError("density field: value count does not match grid");
}

double DensityField::mass() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * grid.cell_volume();
}

double DensityField::max() const {
    return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

double DensityField::l2_norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s * grid.cell_volume());
}

double l2_distance(const DensityField& a, const DensityField& b) {
    if (!(a.grid == b.grid)) throw MismatchError("l2_distance: grid mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double d = a.values[i] - b.values[i];
        s += d * d;
    }
    return std::sqrt(s * a.grid.cell_volume());
}

double second_moment(const DensityField& rho) {
    double s = 0.0;
    for (std::size_t i = 0; i < rho.values.size(); ++i) s += norm2(rho.grid.point(i)) * rho.values[i];
    return s * rho.grid.cell_volume();
}

double rms_difference_relative_to_peak(const DensityField& a, const DensityField& b, double support_frac) {
    if (!(a.grid == b.grid)) throw MismatchError("rms_difference_relative_to_peak: grid mismatch");
    const double peak = std::max(a.max(), b.max());
    if (!(peak > 0.0)) throw InvalidStateError("rms_difference_relative_to_peak: no positive peak");
    double s = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        if (std::max(a.values[i], b.values[i]) < support_frac * peak) continue;
        const double d = a.values[i] - b.values[i];
        s += d * d;
        ++count;
    }
    return count == 0 ? 0.0 : std::sqrt(s / static_cast<double>(count)) / peak;
}

DensityField boltzmann_density(const SpatialGrid& grid) {
    DensityField rho(grid);
    for (std::size_t i = 0; i < rho.values.size(); ++i) rho.values[i] = std::exp(-0.5 * norm2(grid.point(i)));
    const double m = rho.mass();
    for (double& v : rho.values) v /= m;
    return rho;
}

}  // namespace fiberfield
