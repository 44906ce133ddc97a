// grelax: batch front end. Reads a JSON config, runs one subcommand, writes JSON/CSV
// artifacts under the output directory.
//
// Exit status: 0 success, 1 computational failure (including a failing verify row),
// 2 usage or configuration error.

#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "grelax/commands.hpp"

namespace {

constexpr int kComputeFailure = 1;
constexpr int kUsage = 2;

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<std::string> out;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relaxed controls for G-SDEs: G-heat solver, G-Brownian simulation, chattering and robust optimization"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    Overrides ov;
    app.add_option("-c,--config", ov.config, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--seed", ov.seed, "override the config seed");
    app.add_option("--paths", ov.paths, "override m_paths")->check(CLI::PositiveNumber);
    app.add_option("-o,--out", ov.out, "override output_dir");

    const std::map<std::string, std::string> help{
        {"gheat", "solve the G-heat equation for the payoff; value at (T, x0)"},
        {"expect", "sublinear expectation of the payoff over the scenario family"},
        {"paths", "simulate G-Brownian paths and quadratic variation per scenario"},
        {"chatter", "pairing errors of chattering approximations of the control"},
        {"solve", "relaxed G-SDE states under the control and chattering stability"},
        {"cost", "robust cost of the control and its chattering stability"},
        {"optimize", "strict and relaxed optima, chattering curve and weak duality"},
        {"verify", "run the acceptance suite and write verify.json"}};
    for (const auto& name : grelax::cli::subcommands()) app.add_subcommand(name, help.at(name));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kUsage;
    }
    const std::string sub = app.get_subcommands().front()->get_name();

    grelax::RunConfig cfg;
    try {
        if (ov.config.empty()) {
            if (sub != "verify") {
                std::cerr << "grelax " << sub << ": --config is required\n";
                return kUsage;
            }
            cfg.seed = grelax::acceptance::default_seed;
        } else {
            cfg = grelax::load_config(ov.config);
        }
        if (ov.seed) cfg.seed = *ov.seed;
        if (ov.paths) cfg.m_paths = *ov.paths;
        if (ov.out) cfg.output_dir = *ov.out;
        grelax::validate(cfg);
    } catch (const std::exception& e) {
        std::cerr << "grelax " << sub << ": " << e.what() << "\n";
        return kUsage;
    }

    try {
        return grelax::cli::run(sub, cfg, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "grelax " << sub << ": " << e.what() << "\n";
        return kComputeFailure;
    }
}
