#include "fiberfield/meanfield/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "fiberfield/core/error.hpp"

namespace fiberfield {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

namespace {

constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in, const std::filesystem::path& path) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw ConfigError("checkpoint " + path.string() + ": truncated file");
    return v;
}

void expect_magic(std::istream& in, const char* magic, const std::filesystem::path& path) {
    char m[4];
    in.read(m, 4);
    if (!in || std::memcmp(m, magic, 4) != 0) throw ConfigError("checkpoint " + path.string() + ": bad magic");
    if (get<std::uint32_t>(in, path) != kVersion) throw ConfigError("checkpoint " + path.string() + ": unsupported version");
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    return in;
}

}  // namespace

void write_kinetic_checkpoint(const std::filesystem::path& path, const KineticField& f) {
    auto out = open_out(path);
    out.write("FFKF", 4);
    put<std::uint32_t>(out, kVersion);
    put<std::int32_t>(out, f.grid_x.n);
    put<double>(out, f.grid_x.half_width);
    put<std::int32_t>(out, f.grid_v->level);
    put<double>(out, f.time);
    put<double>(out, f.mass());
    put<std::uint64_t>(out, f.values.size());
    out.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!out) throw ConfigError("failed writing " + path.string());
}

KineticField read_kinetic_checkpoint(const std::filesystem::path& path) {
    auto in = open_in(path);
    expect_magic(in, "FFKF", path);
    const int n = get<std::int32_t>(in, path);
    const double L = get<double>(in, path);
    const int level = get<std::int32_t>(in, path);
    const double time = get<double>(in, path);
    get<double>(in, path);
    const auto count = get<std::uint64_t>(in, path);
    KineticField f(SpatialGrid(3, n, L), std::make_shared<const GeodesicGrid>(build_geodesic_grid(level)));
    if (count != f.values.size()) throw ConfigError("checkpoint " + path.string() + ": value count does not match header");
    in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw ConfigError("checkpoint " + path.string() + ": truncated file");
    f.time = time;
    return f;
}

void write_density_checkpoint(const std::filesystem::path& path, const DensityField& rho) {
    auto out = open_out(path);
    out.write("FFDF", 4);
    put<std::uint32_t>(out, kVersion);
    put<std::int32_t>(out, rho.grid.dim);
    put<std::int32_t>(out, rho.grid.n);
    put<double>(out, rho.grid.half_width);
    put<double>(out, rho.mass());
    put<std::uint64_t>(out, rho.values.size());
    out.write(reinterpret_cast<const char*>(rho.values.data()), static_cast<std::streamsize>(rho.values.size() * sizeof(double)));
    if (!out) throw ConfigError("failed writing " + path.string());
}

DensityField read_density_checkpoint(const std::filesystem::path& path) {
    auto in = open_in(path);
    expect_magic(in, "FFDF", path);
    const int dim = get<std::int32_t>(in, path);
    const int n = get<std::int32_t>(in, path);
    const double L = get<double>(in, path);
    get<double>(in, path);
    const auto count = get<std::uint64_t>(in, path);
    DensityField rho(SpatialGrid(dim, n, L));
    if (count != rho.values.size()) throw ConfigError("checkpoint " + path.string() + ": value count does not match header");
    in.read(reinterpret_cast<char*>(rho.values.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw ConfigError("checkpoint " + path.string() + ": truncated file");
    return rho;
}

}  // namespace fiberfield
