// Copyright (c) 2026 the eitsim authors.
// SPDX-License-Identifier: Apache-2.0

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "eitsim/errors.hpp"
#include "eitsim/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "eit_sim: swept-probe EIT simulator, spectrum synthesizer and fitter "
        "for a four-level Rydberg ladder system"};

    std::string config_path;
    eitsim::RunRequest req;
    std::uint64_t seed = 0;
    bool seed_set = false;

    app.add_option("config", config_path, "configuration file (key = value)")
        ->required();
    app.add_option("--output-dir", req.output_dir,
                   "directory for output files (default '.')");
    auto* seed_opt =
        app.add_option("--seed", seed, "override the config's RNG seed");
    app.add_flag("--quiet", req.quiet, "suppress progress output");

    CLI11_PARSE(app, argc, argv);
    seed_set = seed_opt->count() > 0;

    try {
        req.config = eitsim::parse_config_file(config_path);
        if (seed_set) req.seed_override = seed;
        return eitsim::run(req);
    } catch (const eitsim::ConfigError& e) {
        std::cerr << "eit_sim: config: " << e.what() << '\n';
        return 2;
    } catch (const eitsim::Error& e) {
        std::cerr << "eit_sim: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "eit_sim: unexpected error: " << e.what() << '\n';
        return 1;
    }
}
