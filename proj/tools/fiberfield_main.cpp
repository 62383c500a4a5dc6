#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fiberfield/core/error.hpp"
#include "fiberfield/harness/config.hpp"
#include "fiberfield/harness/run.hpp"

namespace {

/// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
constexpr int exit_failure = 1;
constexpr int exit_usage = 2;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-scale fiber lay-down simulations"};
    app.set_version_flag("--version", fiberfield::version());
    std::string mode_name;
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    app.add_option("mode", mode_name, "micro | meanfield | stationary | macro | verify | compare")
        ->required()
        ->check(CLI::IsMember({"micro", "meanfield", "stationary", "macro", "verify", "compare"}));
    app.add_option("--config", config_path, "JSON experiment configuration")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory (default: output.dir from the config)");
    app.add_option("--seed", seed, "Overrides numerics.seed");
    app.footer("Worker threads: set FIBERFIELD_THREADS.");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "fiberfield: " << e.what() << '\n';
        return exit_usage;
    }

    fiberfield::ExperimentConfig cfg;
    try {
        cfg = fiberfield::load_config(config_path);
        if (seed) cfg.numerics.seed = *seed;
        if (out_dir) cfg.output.dir = *out_dir;
        cfg.validate();
    } catch (const fiberfield::ConfigError& e) {
        std::cerr << "fiberfield: " << config_path << ": " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "fiberfield: " << e.what() << '\n';
        return exit_usage;
    }

    try {
        const auto summary = fiberfield::run(fiberfield::mode_from_string(mode_name), cfg, cfg.output.dir);
        for (const auto& w : summary.warnings) std::cerr << "fiberfield: warning: " << w << '\n';
        std::cout << mode_name << ": wrote " << summary.outputs.size() << " files to " << summary.out_dir.string()
                  << " in " << summary.wall_seconds << " s\n";
        for (const auto& [key, value] : summary.results) std::cout << "  " << key << " = " << value << '\n';
    } catch (const std::exception& e) {
        std::cerr << "fiberfield: " << e.what() << '\n';
        return exit_failure;
    }
    return 0;
}
