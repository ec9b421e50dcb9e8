#include "surfsd/cli/config.hpp"
#include "surfsd/cli/drivers.hpp"
#include "surfsd/error.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <string>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stabilized cut finite element solver for convection-diffusion on closed surfaces"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    bool quiet = false;
    const std::pair<const char*, const char*> commands[] = {
        {"solve", "Solve one problem on one mesh"},
        {"convergence", "Error table over a sequence of meshes"},
        {"condition", "Condition numbers over meshes, gammas and surface offsets"},
        {"layer", "Layer problem under several stabilization settings"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "YAML run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Output directory (overrides output.dir)");
        sub->add_flag("-q,--quiet", quiet, "No progress messages");
    }
    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    surfsd::cli::RunConfig config;
    try {
        config = surfsd::cli::load_config(config_path);
    } catch (const surfsd::cli::ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return kExitConfig;
    }
    if (!out_dir.empty()) {
        config.output.dir = out_dir;
    }
    const std::filesystem::path dir = config.output.dir;
    surfsd::cli::Progress progress;
    if (!quiet) {
        progress = [](const std::string& msg) { fmt::print(stderr, "{}\n", msg); };
    }

    try {
        std::vector<std::filesystem::path> files;
        if (command == "solve") {
            files = surfsd::cli::run_solve(config, dir, progress);
        } else if (command == "convergence") {
            files = surfsd::cli::run_convergence(config, dir, progress);
        } else if (command == "condition") {
            files = surfsd::cli::run_condition(config, dir, progress);
        } else {
            files = surfsd::cli::run_layer(config, dir, progress);
        }
        for (const auto& f : files) {
            fmt::print("{}\n", f.string());
        }
    } catch (const surfsd::cli::ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return kExitConfig;
    } catch (const surfsd::Error& e) {
        fmt::print(stderr, "{} failed: {}\n", command, e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        fmt::print(stderr, "{} failed: {}\n", command, e.what());
        return 1;
    }
    return 0;
}
