#include "fiberfield/sphere/geodesic_grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <utility>

#include "fiberfield/core/error.hpp"

namespace fiberfield {

namespace {

struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
};

Mesh icosahedron() {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    Mesh m;
    const std::array<Vec3, 12> raw = {{{0, 1, phi}, {0, -1, phi}, {0, 1, -phi}, {0, -1, -phi},
                                       {1, phi, 0}, {-1, phi, 0}, {1, -phi, 0}, {-1, -phi, 0},
                                       {phi, 0, 1}, {-phi, 0, 1}, {phi, 0, -1}, {-phi, 0, -1}}};
    for (const auto& v : raw) m.vertices.push_back(normalized(v));
    // Faces are the vertex triples that are pairwise nearest neighbours (edge length 2 before normalisation).
    const double edge2 = 4.0 / (1.0 + phi * phi);
    auto adjacent = [&](int a, int b) { return std::abs(norm2(m.vertices[a] - m.vertices[b]) - edge2) < 1e-9; };
    for (int a = 0; a < 12; ++a)
        for (int b = a + 1; b < 12; ++b)
            for (int c = b + 1; c < 12; ++c) {
                if (!(adjacent(a, b) && adjacent(b, c) && adjacent(a, c))) continue;
                const Vec3& va = m.vertices[a];
                const Vec3& vb = m.vertices[b];
                const Vec3& vc = m.vertices[c];
                if (dot(cross(vb - va, vc - va), va + vb + vc) > 0.0)
                    m.faces.push_back({a, b, c});
                else
                    m.faces.push_back({a, c, b});
            }
    return m;
}

Mesh subdivide(const Mesh& in) {
    Mesh out;
    out.vertices = in.vertices;
    std::map<std::pair<int, int>, int> midpoint_of;
    auto midpoint = [&](int a, int b) {
        const auto key = std::minmax(a, b);
        auto it = midpoint_of.find(key);
        if (it != midpoint_of.end()) return it->second;
        const int idx = static_cast<int>(out.vertices.size());
        out.vertices.push_back(normalized(in.vertices[a] + in.vertices[b]));
        midpoint_of.emplace(key, idx);
        return idx;
    };
    out.faces.reserve(in.faces.size() * 4);
    for (const auto& f : in.faces) {
        const int ab = midpoint(f[0], f[1]);
        const int bc = midpoint(f[1], f[2]);
        const int ca = midpoint(f[2], f[0]);
        out.faces.push_back({f[0], ab, ca});
        out.faces.push_back({ab, f[1], bc});
        out.faces.push_back({ca, bc, f[2]});
        out.faces.push_back({ab, bc, ca});
    }
    return out;
}

double spherical_triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    const double numerator = dot(a, cross(b, c));
    const double denominator = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    return 2.0 * std::atan2(std::abs(numerator), denominator);
}

}  // namespace

double GeodesicGrid::mean_midpoint_distance() const {
    double s = 0.0;
    for (const auto& e : edges) s += e.distance;
    return edges.empty() ? 0.0 : s / static_cast<double>(edges.size());
}

GeodesicGrid build_geodesic_grid(int level) {
    if (level < 0) throw ConfigError("geodesic grid: level must be >= 0");
    Mesh mesh = icosahedron();
    for (int l = 0; l < level; ++l) mesh = subdivide(mesh);

    GeodesicGrid g;
    g.level = level;
    g.vertices = std::move(mesh.vertices);
    g.cells = std::move(mesh.faces);
    const std::size_t nc = g.cells.size();
    g.midpoints.resize(nc);
    g.areas.resize(nc);

    for (std::size_t c = 0; c < nc; ++c) {
        const Vec3& a = g.vertices[g.cells[c][0]];
        const Vec3& b = g.vertices[g.cells[c][1]];
        const Vec3& v = g.vertices[g.cells[c][2]];
        const Vec3 n = cross(b - a, v - a);
        if (norm(n) < 1e-14) throw InvalidStateError("geodesic grid: degenerate triangle");
        Vec3 centre = normalized(n);
        if (dot(centre, a + b + v) < 0.0) centre = -centre;
        g.midpoints[c] = centre;
        g.areas[c] = spherical_triangle_area(a, b, v);
    }

    // Edge adjacency.
    std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> owners;
    for (std::size_t c = 0; c < nc; ++c)
        for (int s = 0; s < 3; ++s) {
            const int a = g.cells[c][s];
            const int b = g.cells[c][(s + 1) % 3];
            owners[std::minmax(a, b)].push_back({static_cast<int>(c), s});
        }

    g.sides.resize(nc);
    g.edges.reserve(owners.size());
    for (const auto& [key, list] : owners) {
        if (list.size() != 2) throw InvalidStateError("geodesic grid: edge not shared by two cells");
        GeodesicEdge e;
        e.cell_i = list[0].first;
        e.cell_j = list[1].first;
        e.vertices = {key.first, key.second};
        const Vec3& v0 = g.vertices[key.first];
        const Vec3& v1 = g.vertices[key.second];
        const Vec3& ti = g.midpoints[e.cell_i];
        const Vec3& tj = g.midpoints[e.cell_j];
        e.length = arc_length(v0, v1);
        e.midpoint = normalized(v0 + v1);
        const Vec3 plane = normalized(cross(v0, v1));
        e.normal = dot(plane, ti) < 0.0 ? plane : -plane;
        e.distance = arc_length(ti, tj);
        Vec3 crossing = normalized(cross(plane, cross(ti, tj)));
        if (dot(crossing, ti + tj) < 0.0) crossing = -crossing;
        e.part_i = arc_length(ti, crossing);
        e.part_j = arc_length(crossing, tj);

        const int idx = static_cast<int>(g.edges.size());
        g.sides[e.cell_i][list[0].second] = {idx, e.cell_j, e.normal};
        // The neighbour computes its own outward normal independently.
        const Vec3 from_j = dot(plane, tj) < 0.0 ? plane : -plane;
        g.sides[e.cell_j][list[1].second] = {idx, e.cell_i, from_j};
        g.edges.push_back(e);
    }
    return g;
}

double GridDiagnostics::worst_invariant_violation() const {
    return std::max({area_sum_error, max_unit_error, max_normal_tangency, max_normal_unit_error, max_antisymmetry,
                     max_orientation_violation, max_equidistance_error, static_cast<double>(bad_edge_sharing)});
}

GridDiagnostics validate_grid(const GeodesicGrid& grid) {
    GridDiagnostics d;
    d.cell_count = grid.cells.size();
    double area = 0.0;
    for (double a : grid.areas) area += a;
    d.area_sum_error = std::abs(area - 4.0 * std::numbers::pi);

    auto unit_err = [](const Vec3& v) { return std::abs(norm(v) - 1.0); };
    for (const auto& v : grid.vertices) d.max_unit_error = std::max(d.max_unit_error, unit_err(v));
    for (const auto& v : grid.midpoints) d.max_unit_error = std::max(d.max_unit_error, unit_err(v));

    std::vector<int> share_count(grid.edges.size(), 0);
    for (const auto& sides : grid.sides)
        for (const auto& s : sides)
            if (s.edge >= 0) ++share_count[s.edge];
    for (int c : share_count)
        if (c != 2) ++d.bad_edge_sharing;

    d.min_part_ratio = 1.0;
    for (std::size_t k = 0; k < grid.edges.size(); ++k) {
        const auto& e = grid.edges[k];
        d.max_unit_error = std::max(d.max_unit_error, unit_err(e.midpoint));
        d.min_part_ratio = std::min(d.min_part_ratio, std::min(e.part_i, e.part_j) / e.distance);
        d.max_distance = std::max(d.max_distance, e.distance);
        d.mean_distance += e.distance;
    }
    if (!grid.edges.empty()) d.mean_distance /= static_cast<double>(grid.edges.size());

    // Per-cell view of the sides: tangency, orientation, antisymmetry, closure.
    std::vector<std::array<Vec3, 2>> seen(grid.edges.size());
    std::vector<int> seen_count(grid.edges.size(), 0);
    for (std::size_t c = 0; c < grid.cells.size(); ++c) {
        Vec3 closure;
        double diameter = 0.0;
        for (int s = 0; s < 3; ++s) {
            const Vec3& a = grid.vertices[grid.cells[c][s]];
            const Vec3& b = grid.vertices[grid.cells[c][(s + 1) % 3]];
            diameter = std::max(diameter, arc_length(a, b));
        }
        std::array<double, 3> radii{};
        for (int s = 0; s < 3; ++s) radii[s] = arc_length(grid.midpoints[c], grid.vertices[grid.cells[c][s]]);
        d.max_equidistance_error = std::max(d.max_equidistance_error,
                                            *std::max_element(radii.begin(), radii.end()) -
                                                *std::min_element(radii.begin(), radii.end()));
        for (const auto& side : grid.sides[c]) {
            if (side.edge < 0) continue;
            const auto& e = grid.edges[side.edge];
            const Vec3& n = side.outward_normal;
            d.max_normal_tangency = std::max(d.max_normal_tangency, std::abs(dot(n, e.midpoint)));
            d.max_normal_unit_error = std::max(d.max_normal_unit_error, unit_err(n));
            const Vec3& other = grid.midpoints[side.neighbor];
            d.max_orientation_violation =
                std::max(d.max_orientation_violation, std::max(0.0, dot(n, grid.midpoints[c] - other)));
            if (seen_count[side.edge] < 2) seen[side.edge][seen_count[side.edge]++] = n;
            closure += n * e.length;
        }
        const Vec3& t = grid.midpoints[c];
        const double tangential = norm(closure - t * dot(t, closure));
        d.max_closure = std::max(d.max_closure, tangential);
        d.max_closure_relative = std::max(d.max_closure_relative, tangential / diameter);
    }
    for (std::size_t k = 0; k < grid.edges.size(); ++k)
        if (seen_count[k] == 2) d.max_antisymmetry = std::max(d.max_antisymmetry, norm(seen[k][0] + seen[k][1]));
    return d;
}

std::vector<double> laplace_beltrami(const GeodesicGrid& grid, std::span<const double> f) {
    if (f.size() != grid.cell_count()) throw MismatchError("laplace_beltrami: size mismatch");
    std::vector<double> out(grid.cell_count(), 0.0);
    for (const auto& e : grid.edges) {
        const double flux = e.length * (f[e.cell_j] - f[e.cell_i]) / e.distance;
        out[e.cell_i] += flux;
        out[e.cell_j] -= flux;
    }
    for (std::size_t c = 0; c < out.size(); ++c) out[c] /= grid.areas[c];
    return out;
}

std::vector<double> upper_hemisphere_fraction(const GeodesicGrid& grid, int resolution) {
    std::vector<double> frac(grid.cell_count(), 0.0);
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
        const Vec3& a = grid.vertices[grid.cells[c][0]];
        const Vec3& b = grid.vertices[grid.cells[c][1]];
        const Vec3& v = grid.vertices[grid.cells[c][2]];
        double inside = 0.0;
        int total = 0;
        for (int i = 0; i < resolution; ++i)
            for (int j = 0; j < resolution - i; ++j) {
                // Sub-triangle centroids of a uniform barycentric split.
                const double u = (i + 1.0 / 3.0) / resolution;
                const double w = (j + 1.0 / 3.0) / resolution;
                const Vec3 p = normalized(a * u + b * w + v * (1.0 - u - w));
                inside += p.z > 1e-14 ? 1.0 : (p.z < -1e-14 ? 0.0 : 0.5);
                ++total;
            }
        frac[c] = inside / total;
    }
    return frac;
}

void write_grid_csv(const GeodesicGrid& grid, std::ostream& cells_out, std::ostream& edges_out) {
    cells_out.precision(17);
    edges_out.precision(17);
    cells_out << "cell,tau1,tau2,tau3,area\n";
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
        const Vec3& t = grid.midpoints[c];
        cells_out << c << ',' << t.x << ',' << t.y << ',' << t.z << ',' << grid.areas[c] << '\n';
    }
    edges_out << "edge,cell_i,cell_j,length,mid1,mid2,mid3,normal1,normal2,normal3,h,h1,h2\n";
    for (std::size_t k = 0; k < grid.edges.size(); ++k) {
        const auto& e = grid.edges[k];
        edges_out << k << ',' << e.cell_i << ',' << e.cell_j << ',' << e.length << ',' << e.midpoint.x << ','
                  << e.midpoint.y << ',' << e.midpoint.z << ',' << e.normal.x << ',' << e.normal.y << ','
                  << e.normal.z << ',' << e.distance << ',' << e.part_i << ',' << e.part_j << '\n';
    }
}

}  // namespace fiberfield
