#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>

#include "fiberfield/core/spatial_grid.hpp"
#include "fiberfield/micro/fiber_system.hpp"

namespace fiberfield {

struct Histogram {
    DensityField density;
    std::size_t total = 0;
    std::size_t out_of_domain = 0;
};

/// Bins positions into the cells centred at the grid points (width dx).
/// Counts are divided by total * dx^d, so in-domain mass is 1 minus the
/// out-of-domain fraction.
Histogram build_histogram(std::span<const Vec3> positions, const SpatialGrid& grid);
Histogram build_histogram(std::span<const FiberState> states, const SpatialGrid& grid);

/// Writes `t,group,fiber,x1,..,xd,tau1,..,taud` rows for every snapshot.
void write_snapshots_csv(std::ostream& out, const EnsembleResult& result, int dim, int fibers_per_group);

}  // namespace fiberfield
