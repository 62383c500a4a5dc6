#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "fiberfield/core/error.hpp"
#include "fiberfield/harness/config.hpp"
#include "fiberfield/harness/io.hpp"
#include "fiberfield/harness/run.hpp"

using namespace fiberfield;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("fiberfield_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ExperimentConfig small_config() {
    auto cfg = parse_config(R"({
        "physics": {"H": 0.1},
        "numerics": {"T": 0.5, "n_x": 9, "L": 4.0, "N": 20, "groups": 4, "stride": 5},
        "output": {"snapshot_interval": 0.25, "radial_bins": 8},
        "verify": {"N_list": [8, 16], "T": 0.3, "seeds": 2}
    })");
    return cfg;
}

}  // namespace

TEST(Config, MinimalDocumentEchoesDefaults) {
    const auto cfg = parse_config(R"({"preset": "paper"})");
    EXPECT_EQ(cfg, preset_config("paper"));
    ASSERT_TRUE(cfg.physics.U.has_value());
    EXPECT_DOUBLE_EQ(cfg.physics.U->strength, 10.0);
    EXPECT_DOUBLE_EQ(cfg.physics.U->radius, 1.4);
    EXPECT_DOUBLE_EQ(cfg.physics.U->regularization, 10.0);
    EXPECT_EQ(cfg.physics.V.kind, CoilingKind::quadratic);
    const std::string echo = serialize_config(cfg);
    for (const char* key : {"\"d\"", "\"A\"", "\"H\"", "\"n_x\"", "\"tol\"", "\"seed\"", "\"threshold_frac\""})
        EXPECT_NE(echo.find(key), std::string::npos) << key;
    EXPECT_FALSE(parse_config(R"({"preset": "free"})").physics.U.has_value());
}

TEST(Config, RejectsUnsupportedDimension) {
    try {
        parse_config(R"({"physics": {"d": 4}})");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("physics.d"), std::string::npos);
    }
}

TEST(Config, UnknownKeyNamesItsPath) {
    try {
        parse_config(R"({"numerics": {"n_x": 11, "nx": 3}})");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("numerics.nx"), std::string::npos);
    }
    EXPECT_THROW(parse_config(R"({"numerics": {"n_x": "eleven"}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"numerics": {"tol": -1}})"), ConfigError);
    EXPECT_THROW(parse_config("{not json"), ConfigError);
    EXPECT_THROW(parse_config(R"({"preset": "other"})"), ConfigError);
}

TEST(Config, SerializeParseRoundTrip) {
    auto cfg = small_config();
    cfg.physics.kernel = DelayKernel::infinite();
    cfg.numerics.seed = 12345678901ull;
    cfg.verify.scheme = Integrator::rk4;
    EXPECT_EQ(parse_config(serialize_config(cfg)), cfg);
    const auto free = preset_config("free");
    EXPECT_EQ(parse_config(serialize_config(free)), free);
}

TEST(RadialProfile, ConstantFieldGivesConstantBins) {
    DensityField rho(SpatialGrid(3, 11, 3.0));
    for (double& v : rho.values) v = 0.7;
    const auto bins = radial_profile(rho, 12);
    std::size_t total = 0;
    for (const auto& b : bins) {
        if (b.count > 0) EXPECT_NEAR(b.mean, 0.7, 1e-14);
        total += b.count;
    }
    EXPECT_EQ(total, rho.grid.size());
    EXPECT_NEAR(bins[3].r, 3.5 * 3.0 * std::sqrt(3.0) / 12, 1e-15);
}

TEST(RadialProfile, GaussianMatchesRadialFunction) {
    const SpatialGrid grid(3, 41, 5.0);
    DensityField rho(grid);
    const double c = std::pow(2 * std::numbers::pi, -1.5);
    for (std::size_t p = 0; p < grid.size(); ++p) rho.values[p] = c * std::exp(-0.5 * norm2(grid.point(p)));
    const auto bins = radial_profile(rho, 40);
    const double width = 5.0 * std::sqrt(3.0) / 40;
    for (const auto& b : bins) {
        if (b.count == 0 || b.r > 4.0) continue;
        EXPECT_NEAR(b.mean, c * std::exp(-0.5 * b.r * b.r), 0.5 * width * width * c) << "r = " << b.r;
    }
}

TEST(RadialProfile, EmptyBinsHaveBlankMean) {
    DensityField rho(SpatialGrid(3, 3, 1.0));
    for (double& v : rho.values) v = 1.0;
    const auto bins = radial_profile(rho, 8);
    std::ostringstream csv;
    write_radial_csv(csv, bins);
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "r,mean,count");
    bool saw_empty = false;
    while (std::getline(lines, line))
        if (line.ends_with(",,0")) saw_empty = true;
    EXPECT_TRUE(saw_empty);
    EXPECT_THROW(radial_profile(rho, 1), ConfigError);
}

TEST(DistanceSeries, ZeroForReferenceAndLinear) {
    const auto ref = boltzmann_density(SpatialGrid(3, 9, 3.0));
    DensityField twice = ref;
    for (double& v : twice.values) v *= 2.0;
    const double times[] = {0.0, 1.0};
    const DensityField fields[] = {ref, twice};
    const auto series = l2_distance_series(times, fields, ref);
    EXPECT_EQ(series[0].l2, 0.0);
    EXPECT_NEAR(series[1].l2, ref.l2_norm(), 1e-15);
    const DensityField other[] = {DensityField(SpatialGrid(3, 7, 3.0)), ref};
    EXPECT_THROW(l2_distance_series(times, other, ref), MismatchError);
}

TEST(DistanceSeries, LogLinearFitRecoversRate) {
    std::vector<SeriesPoint> series;
    for (int k = 0; k <= 20; ++k) series.push_back({0.5 * k, 3.0 * std::exp(-0.8 * 0.5 * k)});
    const auto fit = fit_log_linear(series, 1.0, 9.0);
    EXPECT_NEAR(fit.slope, -0.8, 1e-12);
    EXPECT_NEAR(fit.intercept, std::log(3.0), 1e-12);
    EXPECT_NEAR(fit.r2, 1.0, 1e-12);
    EXPECT_EQ(fit.points, 17u);
    EXPECT_THROW(fit_log_linear(series, 20.0, 30.0), InvalidStateError);
}

TEST(DensityCsv, RoundTripIsExact) {
    const auto rho = boltzmann_density(SpatialGrid(3, 7, 2.5));
    const auto dir = scratch_dir("csv");
    fs::create_directories(dir);
    write_density_csv(dir / "rho.csv", rho);
    const auto back = read_density_csv(dir / "rho.csv");
    EXPECT_EQ(back.grid, rho.grid);
    EXPECT_EQ(back.values, rho.values);
    std::ofstream(dir / "bad.csv") << "x,y\n1,2\n";
    EXPECT_THROW(read_density_csv(dir / "bad.csv"), Error);
    fs::remove_all(dir);
}

TEST(Run, StationaryPresetWritesDensityAndResiduals) {
    auto cfg = small_config();
    const auto dir = scratch_dir("stationary");
    const auto summary = run(Mode::stationary, cfg, dir);
    for (const char* f : {"stationary_density.csv", "stationary_residuals.csv", "stationary_radial.csv",
                          "stationary_density.ffd", "manifest.json", "COMPLETED"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    EXPECT_TRUE(summary.warnings.empty());
    const std::string residuals = slurp(dir / "stationary_residuals.csv");
    EXPECT_EQ(residuals.substr(0, residuals.find('\n')), "iter,linf_diff,energy");
    const auto rho = read_density_csv(dir / "stationary_density.csv");
    EXPECT_NEAR(rho.mass(), 1.0, 1e-12);
    const std::string manifest = slurp(dir / "manifest.json");
    EXPECT_NE(manifest.find("\"mode\": \"stationary\""), std::string::npos);
    EXPECT_NE(manifest.find("\"wall_seconds\""), std::string::npos);
    fs::remove_all(dir);
}

TEST(Run, CompareListsEveryMissingFile) {
    const auto dir = scratch_dir("missing");
    try {
        run(Mode::compare, small_config(), dir);
        FAIL();
    } catch (const Error& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("micro_density.csv"), std::string::npos);
        EXPECT_NE(msg.find("meanfield_density.csv"), std::string::npos);
    }
    EXPECT_FALSE(fs::exists(dir / "COMPLETED"));
    fs::remove_all(dir);
}

TEST(Run, CompareMicroAgainstMeanFieldIsSymmetric) {
    auto cfg = small_config();
    const auto dir = scratch_dir("compare");
    run(Mode::micro, cfg, dir);
    run(Mode::meanfield, cfg, dir);
    run(Mode::compare, cfg, dir);
    EXPECT_EQ(slurp(dir / "comparison.csv").substr(0, 21), "a,b,l2,rms_rel_peak\nm");
    const auto forward = compare_densities(dir, {"micro", "meanfield"});
    const auto backward = compare_densities(dir, {"meanfield", "micro"});
    ASSERT_EQ(forward.size(), 2u);
    EXPECT_EQ(forward[1].a, "micro_half_a");
    EXPECT_EQ(forward[0].l2, backward[0].l2);
    EXPECT_EQ(forward[0].rms_rel_peak, backward[0].rms_rel_peak);
    EXPECT_GT(forward[0].l2, 0.0);
    fs::remove_all(dir);
}

TEST(Run, RerunsAreByteIdentical) {
    auto cfg = small_config();
    const auto a = scratch_dir("rerun_a");
    const auto b = scratch_dir("rerun_b");
    for (Mode m : {Mode::micro, Mode::meanfield, Mode::macro, Mode::verify}) {
        const auto first = run(m, cfg, a);
        run(m, cfg, b);
        for (const auto& name : first.outputs) EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
    }
    cfg.numerics.seed = 2;
    run(Mode::micro, cfg, b);
    EXPECT_NE(slurp(a / "micro_density.csv"), slurp(b / "micro_density.csv"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Run, ModuleErrorsCarryModeName) {
    auto cfg = small_config();
    cfg.numerics.macro_dt = 50.0;
    cfg.numerics.T = 100.0;
    cfg.output.snapshot_interval = 0.0;
    const auto dir = scratch_dir("cfl");
    try {
        run(Mode::macro, cfg, dir);
        FAIL();
    } catch (const CflError& e) {
        EXPECT_EQ(std::string(e.what()).rfind("macro: ", 0), 0u);
    }
    fs::remove_all(dir);
}
