#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "fiberfield/core/spatial_grid.hpp"
#include "fiberfield/stationary/fixed_point.hpp"

namespace fiberfield {

/// Header "x1,x2,x3,rho" (or "x1,x2,rho" in 2-D), one row per grid point in
/// index order, values printed with %.17g.
void write_density_csv(std::ostream& out, const DensityField& rho);
void write_density_csv(const std::filesystem::path& path, const DensityField& rho);
/// Reconstructs the grid from the rows. Throws Error on malformed files.
DensityField read_density_csv(const std::filesystem::path& path);

struct RadialBin {
    double r = 0.0;
    double mean = 0.0;
    std::size_t count = 0;
};

/// Shell averages over grid points binned by |x|; bin j covers
/// [j w, (j + 1) w) with w = L sqrt(d) / n_bins and centre (j + 1/2) w.
std::vector<RadialBin> radial_profile(const DensityField& rho, int n_bins);
/// Header "r,mean,count"; empty bins leave the mean field empty.
void write_radial_csv(std::ostream& out, std::span<const RadialBin> bins);

struct SeriesPoint {
    double t = 0.0;
    double l2 = 0.0;
};

/// ||rho(t) - reference||_2 for each snapshot. Throws MismatchError on grid mismatch.
std::vector<SeriesPoint> l2_distance_series(std::span<const double> times, std::span<const DensityField> fields,
                                            const DensityField& reference);
/// Header "t,l2".
void write_series_csv(std::ostream& out, std::span<const SeriesPoint> series);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;
};

/// Least-squares fit of ln l2 against t over points with t in [t_begin, t_end] and l2 > 0.
LinearFit fit_log_linear(std::span<const SeriesPoint> series, double t_begin, double t_end);

/// Header "iter,linf_diff,energy".
void write_residuals_csv(std::ostream& out, std::span<const StationaryIteration> history);

}  // namespace fiberfield
