#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fiberfield/harness/config.hpp"

namespace fiberfield {

/// Library version string, recorded in every manifest.
std::string version();

struct RunSummary {
    Mode mode = Mode::micro;
    std::filesystem::path out_dir;
    std::vector<std::string> outputs;  // file names relative to out_dir
    std::vector<std::pair<std::string, double>> results;
    std::vector<std::string> warnings;
    double wall_seconds = 0.0;
};

/// Runs one mode and writes its data files, manifest.json and the COMPLETED
/// marker into out_dir (created if needed). A stale marker is removed first.
/// Module errors propagate with the mode name prefixed.
RunSummary run(Mode mode, const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Normalised indicator of [-1, 1]^d on the grid.
DensityField box_density(const SpatialGrid& grid);

struct Comparison {
    std::string a;
    std::string b;
    double l2 = 0.0;
    double rms_rel_peak = 0.0;
};

/// Pairwise distances between <dir>/<name>_density.csv files, plus the
/// micro_half_a / micro_half_b pair when both exist and "micro" is an input.
/// Throws Error listing every missing file.
std::vector<Comparison> compare_densities(const std::filesystem::path& dir, const std::vector<std::string>& inputs);

}  // namespace fiberfield
