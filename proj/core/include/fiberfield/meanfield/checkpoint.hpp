#pragma once

#include <filesystem>

#include "fiberfield/core/spatial_grid.hpp"
#include "fiberfield/meanfield/kinetic_field.hpp"

namespace fiberfield {

/// Binary little-endian kinetic checkpoint:
///   "FFKF" u32 version i32 n_x f64 L i32 level f64 time f64 mass u64 count f64[count]
/// with values in KineticField order (point-major, cell-minor).
void write_kinetic_checkpoint(const std::filesystem::path& path, const KineticField& f);
KineticField read_kinetic_checkpoint(const std::filesystem::path& path);

/// Density checkpoint: "FFDF" u32 version i32 dim i32 n_x f64 L f64 mass u64 count f64[count].
void write_density_checkpoint(const std::filesystem::path& path, const DensityField& rho);
DensityField read_density_checkpoint(const std::filesystem::path& path);

}  // namespace fiberfield
