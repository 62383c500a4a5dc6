#include "fiberfield/meanfield/transport.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fiberfield/core/error.hpp"
#include "fiberfield/core/parallel.hpp"

namespace fiberfield {

namespace {

// Rows: Bernstein control values; columns: nodes -1, 0, 1, 2.
constexpr double kControl[4][4] = {{0.0, 1.0, 0.0, 0.0},
                                   {-1.0 / 9.0, 5.0 / 6.0, 1.0 / 3.0, -1.0 / 18.0},
                                   {-1.0 / 18.0, 1.0 / 3.0, 5.0 / 6.0, -1.0 / 9.0},
                                   {0.0, 0.0, 1.0, 0.0}};

std::array<double, 4> bernstein(double t) {
    const double u = 1.0 - t;
    return {u * u * u, 3.0 * t * u * u, 3.0 * t * t * u, t * t * t};
}

}  // namespace

std::array<double, 4> bezier_controls(const std::array<double, 4>& p) {
    std::array<double, 4> b{};
    for (int m = 0; m < 4; ++m)
        b[m] = kControl[m][0] * p[0] + kControl[m][1] * p[1] + kControl[m][2] * p[2] + kControl[m][3] * p[3];
    return b;
}

double bezier_interpolate(const BezierStencil& s, const Vec3& xi, bool limiting) {
    const auto [lo_it, hi_it] = std::minmax_element(s.begin(), s.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    // Control values, axis by axis.
    std::array<double, 64> a{}, b{}, v{};
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) {
            const auto c = bezier_controls({s[0 * 16 + j * 4 + k], s[1 * 16 + j * 4 + k], s[2 * 16 + j * 4 + k],
                                            s[3 * 16 + j * 4 + k]});
            for (int m = 0; m < 4; ++m) a[m * 16 + j * 4 + k] = c[m];
        }
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) {
            const auto c = bezier_controls({a[i * 16 + 0 * 4 + k], a[i * 16 + 1 * 4 + k], a[i * 16 + 2 * 4 + k],
                                            a[i * 16 + 3 * 4 + k]});
            for (int m = 0; m < 4; ++m) b[i * 16 + m * 4 + k] = c[m];
        }
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const auto c = bezier_controls({b[i * 16 + j * 4 + 0], b[i * 16 + j * 4 + 1], b[i * 16 + j * 4 + 2],
                                            b[i * 16 + j * 4 + 3]});
            for (int m = 0; m < 4; ++m) v[i * 16 + j * 4 + m] = c[m];
        }
    const auto bx = bernstein(xi.x), by = bernstein(xi.y), bz = bernstein(xi.z);
    double sum = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) {
                double c = v[i * 16 + j * 4 + k];
                if (limiting) c = std::clamp(c, lo, hi);
                sum += bx[i] * by[j] * bz[k] * c;
            }
    return sum;
}

namespace {

// Zero-padded line: pad[s + guard] holds node s for 0 <= s < n.
struct Line {
    std::vector<double> pad;
    int guard = 0;
    int n = 0;

    void reset(int n_, int o) {
        n = n_;
        guard = std::abs(o) + 2;
        pad.assign(static_cast<std::size_t>(n + 2 * guard), 0.0);
    }
    double* data() { return pad.data() + guard; }
    const double* data() const { return pad.data() + guard; }
};

// Control values of the cubic on [pos + o, pos + o + 1] for all positions of a line.
void line_controls(const Line& line, int o, double* out0, double* out1, double* out2, double* out3) {
    const double* p = line.data() + o - 1;
    for (int pos = 0; pos < line.n; ++pos) {
        const double a = p[pos], b = p[pos + 1], c = p[pos + 2], d = p[pos + 3];
        out0[pos] = b;
        out1[pos] = kControl[1][0] * a + kControl[1][1] * b + kControl[1][2] * c + kControl[1][3] * d;
        out2[pos] = kControl[2][0] * a + kControl[2][1] * b + kControl[2][2] * c + kControl[2][3] * d;
        out3[pos] = c;
    }
}

void line_range(const Line& lo_line, const Line& hi_line, int o, double* lo, double* hi) {
    const double* l = lo_line.data() + o - 1;
    const double* h = hi_line.data() + o - 1;
    for (int pos = 0; pos < lo_line.n; ++pos) {
        lo[pos] = std::min(std::min(l[pos], l[pos + 1]), std::min(l[pos + 2], l[pos + 3]));
        hi[pos] = std::max(std::max(h[pos], h[pos + 1]), std::max(h[pos + 2], h[pos + 3]));
    }
}

struct SliceBuffers {
    std::vector<double> p1, lo1, hi1;  // 4 blocks of one x-slab, slab range
    std::vector<double> p2, lo2, hi2;  // 16 blocks of one x-slab
    Line line, lo_line, hi_line;
    std::vector<double> c0, c1, c2, c3, lo, hi, acc;
};

// Interpolates one velocity cell's slice `in` (contiguous, n^3) into `out`.
void transport_slice(SliceBuffers& buf, int n, const std::array<int, 3>& o, const std::array<double, 3>& xi,
                     bool limiting, const double* in, double* out) {
    const std::size_t n2 = static_cast<std::size_t>(n) * n;
    buf.p1.resize(4 * n2);
    buf.lo1.resize(n2);
    buf.hi1.resize(n2);
    buf.p2.resize(16 * n2);
    buf.lo2.resize(n2);
    buf.hi2.resize(n2);
    for (auto* v : {&buf.c0, &buf.c1, &buf.c2, &buf.c3, &buf.lo, &buf.hi, &buf.acc}) v->resize(n);

    const auto bx = bernstein(xi[0]), by = bernstein(xi[1]), bz = bernstein(xi[2]);
    double w[16][4];
    for (int m1 = 0; m1 < 4; ++m1)
        for (int m2 = 0; m2 < 4; ++m2)
            for (int m3 = 0; m3 < 4; ++m3) w[m1 * 4 + m2][m3] = bx[m1] * by[m2] * bz[m3];

    for (int i = 0; i < n; ++i) {
        // x: combine the four input slabs i + o - 1 .. i + o + 2.
        const double* slab[4];
        for (int q = 0; q < 4; ++q) {
            const int s = i + o[0] - 1 + q;
            slab[q] = (s >= 0 && s < n) ? in + s * n2 : nullptr;
        }
        std::fill(buf.p1.begin(), buf.p1.end(), 0.0);
        for (int q = 0; q < 4; ++q) {
            const double* src = slab[q];
            for (int m = 0; m < 4; ++m) {
                const double cm = kControl[m][q];
                if (!src || cm == 0.0) continue;
                double* dst = buf.p1.data() + m * n2;
                for (std::size_t t = 0; t < n2; ++t) dst[t] += cm * src[t];
            }
        }
        for (std::size_t t = 0; t < n2; ++t) {
            double lo = slab[0] ? slab[0][t] : 0.0;
            double hi = lo;
            for (int q = 1; q < 4; ++q) {
                const double v = slab[q] ? slab[q][t] : 0.0;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            buf.lo1[t] = lo;
            buf.hi1[t] = hi;
        }

        // y: rows j + o - 1 .. j + o + 2 of each x-block.
        for (int j = 0; j < n; ++j) {
            double* lo2 = buf.lo2.data() + j * n;
            double* hi2 = buf.hi2.data() + j * n;
            for (int k = 0; k < n; ++k) {
                double lo = 0.0, hi = 0.0;
                for (int q = 0; q < 4; ++q) {
                    const int s = j + o[1] - 1 + q;
                    const double l = (s >= 0 && s < n) ? buf.lo1[s * n + k] : 0.0;
                    const double h = (s >= 0 && s < n) ? buf.hi1[s * n + k] : 0.0;
                    lo = q == 0 ? l : std::min(lo, l);
                    hi = q == 0 ? h : std::max(hi, h);
                }
                lo2[k] = lo;
                hi2[k] = hi;
            }
            for (int m1 = 0; m1 < 4; ++m1)
                for (int m2 = 0; m2 < 4; ++m2) {
                    double* dst = buf.p2.data() + (m1 * 4 + m2) * n2 + j * n;
                    std::fill_n(dst, n, 0.0);
                    for (int q = 0; q < 4; ++q) {
                        const int s = j + o[1] - 1 + q;
                        const double cm = kControl[m2][q];
                        if (s < 0 || s >= n || cm == 0.0) continue;
                        const double* src = buf.p1.data() + m1 * n2 + s * n;
                        for (int k = 0; k < n; ++k) dst[k] += cm * src[k];
                    }
                }
        }

        // z: fused with limiting and Bernstein evaluation.
        buf.line.reset(n, o[2]);
        buf.lo_line.reset(n, o[2]);
        buf.hi_line.reset(n, o[2]);
        for (int j = 0; j < n; ++j) {
            std::copy_n(buf.lo2.data() + j * n, n, buf.lo_line.data());
            std::copy_n(buf.hi2.data() + j * n, n, buf.hi_line.data());
            line_range(buf.lo_line, buf.hi_line, o[2], buf.lo.data(), buf.hi.data());
            std::fill(buf.acc.begin(), buf.acc.end(), 0.0);
            for (int b = 0; b < 16; ++b) {
                std::copy_n(buf.p2.data() + b * n2 + j * n, n, buf.line.data());
                line_controls(buf.line, o[2], buf.c0.data(), buf.c1.data(), buf.c2.data(), buf.c3.data());
                const double* cs[4] = {buf.c0.data(), buf.c1.data(), buf.c2.data(), buf.c3.data()};
                for (int m = 0; m < 4; ++m) {
                    const double wm = w[b][m];
                    const double* v = cs[m];
                    if (limiting)
                        for (int k = 0; k < n; ++k) buf.acc[k] += wm * std::clamp(v[k], buf.lo[k], buf.hi[k]);
                    else
                        for (int k = 0; k < n; ++k) buf.acc[k] += wm * v[k];
                }
            }
            std::copy_n(buf.acc.data(), n, out + i * n2 + j * n);
        }
    }
}

// Cache-blocked transpose of a rows x cols matrix.
void transpose(const double* src, double* dst, std::size_t rows, std::size_t cols) {
    constexpr std::size_t B = 32;
    for (std::size_t r0 = 0; r0 < rows; r0 += B)
        for (std::size_t c0 = 0; c0 < cols; c0 += B) {
            const std::size_t r1 = std::min(rows, r0 + B), c1 = std::min(cols, c0 + B);
            for (std::size_t r = r0; r < r1; ++r)
                for (std::size_t c = c0; c < c1; ++c) dst[c * rows + r] = src[r * cols + c];
        }
}

}  // namespace

TransportReport transport_step(KineticField& f, double dt, const TransportOptions& options) {
    TransportReport report;
    report.mass_before = f.mass();
    if (dt == 0.0) {
        report.mass_after_interpolation = report.mass_before;
        return report;
    }
    const int n = f.grid_x.n;
    const std::size_t n3 = f.points();
    const std::size_t nc = f.cells();
    const double dx = f.grid_x.dx();

    std::vector<double> by_cell(f.values.size());
    transpose(f.values.data(), by_cell.data(), n3, nc);
    std::vector<double> moved(f.values.size());

    parallel_for(nc, [&](std::size_t c) {
        thread_local SliceBuffers buf;
        const Vec3 tau = f.grid_v->midpoints[c];
        std::array<int, 3> o{};
        std::array<double, 3> xi{};
        for (int a = 0; a < 3; ++a) {
            const double shift = -dt * tau[a] / dx;
            o[a] = static_cast<int>(std::floor(shift));
            xi[a] = shift - o[a];
        }
        transport_slice(buf, n, o, xi, options.limiting, by_cell.data() + c * n3, moved.data() + c * n3);
    });
    transpose(moved.data(), f.values.data(), nc, n3);

    report.mass_after_interpolation = f.mass();
    report.repair_factor = conservation_repair(f, report.mass_before);

    // Mass on the outermost layer of grid points.
    const DensityField rho = moment_density(f);
    double boundary = 0.0;
    for (std::size_t p = 0; p < n3; ++p) {
        const auto ijk = f.grid_x.multi_index(p);
        const bool edge = std::any_of(ijk.begin(), ijk.end(), [n](int v) { return v == 0 || v == n - 1; });
        if (edge) boundary += rho.values[p];
    }
    boundary *= f.grid_x.cell_volume();
    report.boundary_fraction = report.mass_before > 0.0 ? boundary / report.mass_before : 0.0;
    report.leakage_warning = report.boundary_fraction > options.leakage_tolerance;
    return report;
}

double conservation_repair(KineticField& f, double mass_before) {
    const double after = f.mass();
    if (after == mass_before) return 1.0;
    if (!(after > 0.0)) {
        if (mass_before > 0.0) throw InvalidStateError("conservation_repair: field lost all mass");
        return 1.0;
    }
    const double factor = mass_before / after;
    for (double& v : f.values) v *= factor;
    return factor;
}

}  // namespace fiberfield
