#include "fiberfield/harness/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "fiberfield/core/error.hpp"

namespace fiberfield {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_density_csv(std::ostream& out, const DensityField& rho) {
    const int d = rho.grid.dim;
    out << (d == 3 ? "x1,x2,x3,rho\n" : "x1,x2,rho\n");
    for (std::size_t p = 0; p < rho.values.size(); ++p) {
        const Vec3 x = rho.grid.point(p);
        for (int a = 0; a < d; ++a) out << fmt(x[a]) << ',';
        out << fmt(rho.values[p]) << '\n';
    }
}

void write_density_csv(const std::filesystem::path& path, const DensityField& rho) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    write_density_csv(out, rho);
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

DensityField read_density_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read '" + path.string() + "'");
    std::string line;
    std::getline(in, line);
    int d = 0;
    if (line == "x1,x2,x3,rho")
        d = 3;
    else if (line == "x1,x2,rho")
        d = 2;
    else
        throw Error("'" + path.string() + "': unexpected density header '" + line + "'");
    std::vector<double> values;
    double max_coord = 0.0;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string cell;
        std::vector<double> parts;
        while (std::getline(fields, cell, ',')) {
            try {
                std::size_t used = 0;
                parts.push_back(std::stod(cell, &used));
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw Error("'" + path.string() + "' row " + std::to_string(row) + ": malformed number");
            }
        }
        if (parts.size() != static_cast<std::size_t>(d + 1))
            throw Error("'" + path.string() + "' row " + std::to_string(row) + ": wrong column count");
        for (int a = 0; a < d; ++a) max_coord = std::max(max_coord, std::abs(parts[a]));
        values.push_back(parts[d]);
    }
    const int n = static_cast<int>(std::lround(std::pow(static_cast<double>(values.size()), 1.0 / d)));
    SpatialGrid grid(d, n, max_coord);
    if (n < 3 || grid.size() != values.size())
        throw Error("'" + path.string() + "': row count is not a full grid");
    return DensityField(grid, std::move(values));
}

std::vector<RadialBin> radial_profile(const DensityField& rho, int n_bins) {
    if (n_bins < 2) throw ConfigError("radial_profile: n_bins must be >= 2");
    const SpatialGrid& g = rho.grid;
    const double width = g.half_width * std::sqrt(static_cast<double>(g.dim)) / n_bins;
    std::vector<RadialBin> bins(n_bins);
    std::vector<double> sums(n_bins, 0.0);
    for (int j = 0; j < n_bins; ++j) bins[j].r = (j + 0.5) * width;
    for (std::size_t p = 0; p < g.size(); ++p) {
        const int j = std::min(n_bins - 1, static_cast<int>(norm(g.point(p)) / width));
        sums[j] += rho.values[p];
        ++bins[j].count;
    }
    for (int j = 0; j < n_bins; ++j)
        if (bins[j].count > 0) bins[j].mean = sums[j] / static_cast<double>(bins[j].count);
    return bins;
}

void write_radial_csv(std::ostream& out, std::span<const RadialBin> bins) {
    out << "r,mean,count\n";
    for (const auto& b : bins) out << fmt(b.r) << ',' << (b.count ? fmt(b.mean) : "") << ',' << b.count << '\n';
}

std::vector<SeriesPoint> l2_distance_series(std::span<const double> times, std::span<const DensityField> fields,
                                            const DensityField& reference) {
    if (times.size() != fields.size()) throw MismatchError("l2_distance_series: times and fields differ in length");
    std::vector<SeriesPoint> out;
    for (std::size_t k = 0; k < fields.size(); ++k) out.push_back({times[k], l2_distance(fields[k], reference)});
    return out;
}

void write_series_csv(std::ostream& out, std::span<const SeriesPoint> series) {
    out << "t,l2\n";
    for (const auto& s : series) out << fmt(s.t) << ',' << fmt(s.l2) << '\n';
}

LinearFit fit_log_linear(std::span<const SeriesPoint> series, double t_begin, double t_end) {
    std::vector<double> t, y;
    for (const auto& s : series)
        if (s.t >= t_begin && s.t <= t_end && s.l2 > 0.0) {
            t.push_back(s.t);
            y.push_back(std::log(s.l2));
        }
    LinearFit fit;
    fit.points = t.size();
    if (t.size() < 3) throw InvalidStateError("fit_log_linear: fewer than three points in the window");
    double mt = 0.0, my = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        mt += t[k];
        my += y[k];
    }
    mt /= t.size();
    my /= t.size();
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        sxx += (t[k] - mt) * (t[k] - mt);
        sxy += (t[k] - mt) * (y[k] - my);
        syy += (y[k] - my) * (y[k] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mt;
    fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    return fit;
}

void write_residuals_csv(std::ostream& out, std::span<const StationaryIteration> history) {
    out << "iter,linf_diff,energy\n";
    for (const auto& h : history) out << h.iter << ',' << fmt(h.linf_diff) << ',' << fmt(h.energy) << '\n';
}

}  // namespace fiberfield
