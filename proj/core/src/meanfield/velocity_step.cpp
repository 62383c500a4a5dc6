#include "fiberfield/meanfield/velocity_step.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "fiberfield/core/bernoulli.hpp"
#include "fiberfield/core/error.hpp"
#include "fiberfield/core/parallel.hpp"

namespace fiberfield {

double diffusion_factor(const GeodesicGrid& grid) {
    std::vector<double> sum(grid.cell_count(), 0.0);
    for (const auto& e : grid.edges) {
        sum[e.cell_i] += e.length / e.distance;
        sum[e.cell_j] += e.length / e.distance;
    }
    double worst = 0.0;
    for (std::size_t c = 0; c < sum.size(); ++c) worst = std::max(worst, sum[c] / grid.areas[c]);
    return worst;
}

namespace {

struct EdgeData {
    int i;
    int j;
    Vec3 normal;
    double length;
    double inv_h;
    double h_i;
    double h_j;
    double inv_min_part;
};

}  // namespace

VelocityStepReport velocity_halfstep(KineticField& f, std::span<const Vec3> g, double A, double dt,
                                     const VelocityStepOptions& options) {
    if (g.size() != f.points()) throw MismatchError("velocity_halfstep: force field size does not match the grid");
    if (!(dt >= 0.0)) throw ConfigError("velocity_halfstep: dt must be >= 0");
    const GeodesicGrid& grid = *f.grid_v;
    const std::size_t nc = grid.cell_count();
    const double s = 0.5 * dt;
    const double D = 0.5 * A * A;

    std::vector<EdgeData> edges;
    edges.reserve(grid.edges.size());
    for (const auto& e : grid.edges)
        edges.push_back({e.cell_i, e.cell_j, e.normal, e.length, 1.0 / e.distance, e.part_i, e.part_j,
                         1.0 / std::min(e.part_i, e.part_j)});
    std::vector<double> inv_area(nc);
    for (std::size_t c = 0; c < nc; ++c) inv_area[c] = 1.0 / grid.areas[c];
    const double diffusion_ratio = s * D * diffusion_factor(grid);

    if (!options.subcycle && diffusion_ratio > 1.0) {
        std::ostringstream msg;
        msg << "velocity_halfstep: diffusion CFL violated (ratio " << diffusion_ratio << " > 1)";
        throw CflError(msg.str());
    }

    std::vector<double> advection_ratio(f.points(), 0.0);
    std::vector<int> substeps(f.points(), 1);

    parallel_for(f.points(), [&](std::size_t p) {
        std::vector<double> fe(edges.size());
        double adv = 0.0;
        for (std::size_t k = 0; k < edges.size(); ++k) {
            fe[k] = 0.5 * dot(g[p], edges[k].normal);
            adv = std::max(adv, std::abs(fe[k]) * edges[k].inv_min_part);
        }
        adv *= s;
        advection_ratio[p] = adv;
        int m = 1;
        if (options.subcycle) {
            const double worst = std::max(adv, diffusion_ratio);
            if (worst > options.substep_limit) m = static_cast<int>(std::ceil(worst / options.substep_limit));
        } else if (adv > 1.0) {
            std::ostringstream msg;
            msg << "velocity_halfstep: advection CFL violated at point " << p << " (ratio " << adv << " > 1)";
            throw CflError(msg.str());
        }
        substeps[p] = m;
        const double sigma = s / m;
        double* row = f.values.data() + p * nc;
        std::vector<double> delta(nc);
        for (int sub = 0; sub < m; ++sub) {
            std::fill(delta.begin(), delta.end(), 0.0);
            for (std::size_t k = 0; k < edges.size(); ++k) {
                const EdgeData& e = edges[k];
                const double a = 0.5 * sigma * fe[k];
                const double fi = row[e.i];
                const double fj = row[e.j];
                const double ci = (fe[k] * (e.h_j - a) - D) * e.inv_h;
                const double cj = (fe[k] * (e.h_i + a) + D) * e.inv_h;
                double flux;
                if (ci <= 0.0 && cj >= 0.0) {
                    flux = e.length * (ci * fi + cj * fj);
                } else if (D > 0.0) {
                    const double z = -fe[k] / (D * e.inv_h);
                    flux = e.length * D * e.inv_h * (bernoulli(z) * fj - bernoulli(-z) * fi);
                } else {
                    flux = e.length * fe[k] * (fe[k] > 0.0 ? fj : fi);
                }
                delta[e.i] += flux;
                delta[e.j] -= flux;
            }
            for (std::size_t c = 0; c < nc; ++c) row[c] += sigma * delta[c] * inv_area[c];
        }
    });

    VelocityStepReport report;
    report.max_diffusion_ratio = diffusion_ratio;
    for (std::size_t p = 0; p < f.points(); ++p) {
        report.max_advection_ratio = std::max(report.max_advection_ratio, advection_ratio[p]);
        report.max_substeps = std::max(report.max_substeps, substeps[p]);
    }
    return report;
}

}  // namespace fiberfield
