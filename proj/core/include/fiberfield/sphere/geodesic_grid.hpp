#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "fiberfield/core/vec3.hpp"

namespace fiberfield {

/// Interface between two cells of the geodesic grid.
struct GeodesicEdge {
    int cell_i = -1;
    int cell_j = -1;
    std::array<int, 2> vertices{};
    double length = 0.0;  // |T_ij|, great-circle length of the shared side
    Vec3 midpoint;        // tau_ij
    Vec3 normal;          // e(tau_ij), tangent at tau_ij, pointing out of cell_i
    double distance = 0.0;  // h_ij between the cell midpoints
    double part_i = 0.0;    // h_1: from tau_i to where the arc crosses the edge
    double part_j = 0.0;    // h_2: from the crossing to tau_j
};

/// One side of a cell as seen from that cell.
struct CellSide {
    int edge = -1;
    int neighbor = -1;
    Vec3 outward_normal;
};

/// Icosahedral geodesic triangulation of S^2 with finite-volume metrics.
struct GeodesicGrid {
    int level = 0;
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> cells;
    std::vector<Vec3> midpoints;  // spherical circumcentres tau_i
    std::vector<double> areas;    // |T_i|
    std::vector<GeodesicEdge> edges;
    std::vector<std::array<CellSide, 3>> sides;

    std::size_t cell_count() const { return cells.size(); }
    double mean_midpoint_distance() const;
};

/// Subdivides the icosahedron `level` times (each triangle into four, new
/// vertices radially projected) and computes all metric data.
GeodesicGrid build_geodesic_grid(int level);

struct GridDiagnostics {
    std::size_t cell_count = 0;
    double area_sum_error = 0.0;         // |sum |T_i| - 4 pi|
    double max_unit_error = 0.0;         // max | |v| - 1 | over vertices, midpoints, edge midpoints
    double max_normal_tangency = 0.0;    // max |e . tau_ij|
    double max_normal_unit_error = 0.0;  // max | |e| - 1 |
    double max_antisymmetry = 0.0;       // max |e_ij + e_ji| over shared edges
    double max_orientation_violation = 0.0;  // max(0, e_ij . (tau_i - tau_j)) -- outward check
    double max_equidistance_error = 0.0;  // circumcentre distance spread per cell
    double max_closure = 0.0;            // max |P_tau_i sum_edges |T_ij| e_ij|
    double max_closure_relative = 0.0;   // closure divided by the cell diameter
    std::size_t bad_edge_sharing = 0;    // edges not shared by exactly two cells
    double min_part_ratio = 0.0;         // min over edges of min(h_1, h_2) / h_ij
    double max_distance = 0.0;           // max h_ij
    double mean_distance = 0.0;          // mean h_ij

    /// Largest violation among the hard invariants.
    double worst_invariant_violation() const;
};

GridDiagnostics validate_grid(const GeodesicGrid& grid);

/// Two-point finite-volume Laplace-Beltrami: (1/|T_i|) sum_j |T_ij| (f_j - f_i) / h_ij.
std::vector<double> laplace_beltrami(const GeodesicGrid& grid, std::span<const double> f);

/// Fraction of each cell lying in the half-space {tau_3 > 0}, estimated by
/// barycentric sub-sampling with `resolution` points per side.
std::vector<double> upper_hemisphere_fraction(const GeodesicGrid& grid, int resolution = 24);

/// CSV dump: one section for cells (index, midpoint, area) and one for edges.
void write_grid_csv(const GeodesicGrid& grid, std::ostream& cells_out, std::ostream& edges_out);

}  // namespace fiberfield
