#include "fiberfield/micro/histogram.hpp"

#include <cmath>
#include <ostream>
#include <vector>

namespace fiberfield {

Histogram build_histogram(std::span<const Vec3> positions, const SpatialGrid& grid) {
    grid.validate();
    Histogram h{DensityField(grid), positions.size(), 0};
    const double dx = grid.dx();
    std::vector<double> counts(grid.size(), 0.0);
    for (const Vec3& p : positions) {
        std::array<int, 3> idx{0, 0, 0};
        bool inside = true;
        for (int a = 0; a < grid.dim; ++a) {
            const double s = (p[a] + grid.half_width) / dx;
            const double r = std::floor(s + 0.5);
            if (!std::isfinite(s) || r < 0.0 || r > grid.n - 1) {
                inside = false;
                break;
            }
            idx[a] = static_cast<int>(r);
        }
        if (!inside) {
            ++h.out_of_domain;
            continue;
        }
        counts[grid.index(idx[0], idx[1], idx[2])] += 1.0;
    }
    if (h.total > 0) {
        const double scale = 1.0 / (static_cast<double>(h.total) * grid.cell_volume());
        for (std::size_t k = 0; k < counts.size(); ++k) h.density.values[k] = counts[k] * scale;
    }
    return h;
}

Histogram build_histogram(std::span<const FiberState> states, const SpatialGrid& grid) {
    std::vector<Vec3> positions(states.size());
    for (std::size_t k = 0; k < states.size(); ++k) positions[k] = states[k].x;
    return build_histogram(positions, grid);
}

void write_snapshots_csv(std::ostream& out, const EnsembleResult& result, int dim, int fibers_per_group) {
    out.precision(17);
    out << "t,group,fiber";
    for (int a = 1; a <= dim; ++a) out << ",x" << a;
    for (int a = 1; a <= dim; ++a) out << ",tau" << a;
    out << '\n';
    for (const auto& snap : result.snapshots)
        for (std::size_t k = 0; k < snap.states.size(); ++k) {
            const auto& s = snap.states[k];
            out << snap.t << ',' << k / fibers_per_group << ',' << k % fibers_per_group;
            for (int a = 0; a < dim; ++a) out << ',' << s.x[a];
            for (int a = 0; a < dim; ++a) out << ',' << s.tau[a];
            out << '\n';
        }
}

}  // namespace fiberfield
