#pragma once

#include <memory>
#include <vector>

#include "fiberfield/core/spatial_grid.hpp"
#include "fiberfield/sphere/geodesic_grid.hpp"

namespace fiberfield {

/// Cell averages f(x_p, T_c) on a Cartesian grid times a geodesic velocity grid.
/// Values are stored point-major: values[p * cells + c].
struct KineticField {
    SpatialGrid grid_x;
    std::shared_ptr<const GeodesicGrid> grid_v;
    std::vector<double> values;
    double time = 0.0;

    KineticField() = default;
    KineticField(const SpatialGrid& gx, std::shared_ptr<const GeodesicGrid> gv);

    std::size_t points() const { return grid_x.size(); }
    std::size_t cells() const { return grid_v->cell_count(); }
    double& at(std::size_t p, std::size_t c) { return values[p * cells() + c]; }
    double at(std::size_t p, std::size_t c) const { return values[p * cells() + c]; }

    /// sum f |T_c| / (4 pi) dx^3, accumulated per point in a fixed order.
    double mass() const;
    double min() const;
};

/// rho(x) = sum_c f(x, c) |T_c| / (4 pi).
DensityField moment_density(const KineticField& f);

/// f(x, tau) = rho(x), isotropic in tau.
KineticField isotropic_field(const DensityField& rho, std::shared_ptr<const GeodesicGrid> gv);

/// Normalised indicator of x in [-1, 1]^3, tau_3 > 0. Velocity cells cut by
/// the equator receive their covered fraction.
KineticField box_initial_field(const SpatialGrid& gx, std::shared_ptr<const GeodesicGrid> gv);

}  // namespace fiberfield
