#include "fiberfield/meanfield/kinetic_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fiberfield/core/error.hpp"
#include "fiberfield/core/parallel.hpp"

namespace fiberfield {

KineticField::KineticField(const SpatialGrid& gx, std::shared_ptr<const GeodesicGrid> gv)
    : grid_x(gx), grid_v(std::move(gv)) {
    grid_x.validate();
    if (grid_x.dim != 3) throw ConfigError("kinetic field: only three space dimensions are supported");
    if (!grid_v) throw ConfigError("kinetic field: missing velocity grid");
    values.assign(points() * cells(), 0.0);
}

double KineticField::mass() const {
    return moment_density(*this).mass();
}

double KineticField::min() const {
    return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
}

DensityField moment_density(const KineticField& f) {
    DensityField rho(f.grid_x);
    const std::size_t nc = f.cells();
    std::vector<double> weights(nc);
    for (std::size_t c = 0; c < nc; ++c) weights[c] = f.grid_v->areas[c] / (4.0 * std::numbers::pi);
    parallel_for(f.points(), [&](std::size_t p) {
        const double* row = f.values.data() + p * nc;
        double s = 0.0;
        for (std::size_t c = 0; c < nc; ++c) s += row[c] * weights[c];
        rho.values[p] = s;
    });
    return rho;
}

KineticField isotropic_field(const DensityField& rho, std::shared_ptr<const GeodesicGrid> gv) {
    KineticField f(rho.grid, std::move(gv));
    const std::size_t nc = f.cells();
    for (std::size_t p = 0; p < f.points(); ++p)
        std::fill_n(f.values.begin() + p * nc, nc, rho.values[p]);
    return f;
}

KineticField box_initial_field(const SpatialGrid& gx, std::shared_ptr<const GeodesicGrid> gv) {
    KineticField f(gx, gv);
    const auto frac = upper_hemisphere_fraction(*gv);
    const std::size_t nc = f.cells();
    for (std::size_t p = 0; p < f.points(); ++p) {
        const Vec3 x = gx.point(p);
        const bool inside = std::abs(x.x) <= 1.0 + 1e-12 && std::abs(x.y) <= 1.0 + 1e-12 && std::abs(x.z) <= 1.0 + 1e-12;
        if (!inside) continue;
        for (std::size_t c = 0; c < nc; ++c) f.at(p, c) = frac[c];
    }
    const double m = f.mass();
    if (!(m > 0.0)) throw ConfigError("box initial condition: no grid point inside [-1, 1]^3");
    for (double& v : f.values) v /= m;
    return f;
}

}  // namespace fiberfield
