// Copyright (c) 2026 the nsfstat authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "nsf/orchestrator.hpp"

int main(int argc, char** argv) {
    CLI::App app{"nsfstat: pseudo-spectral compressible flow simulator and statistics toolkit"};

    std::string config_path;
    std::string mode_override;
    std::string out_override;
    std::uint64_t seed_override = 0;
    bool seed_given = false;
    int workers_override = 0;
    bool verbose = false;

    app.add_option("--config", config_path, "Path to JSON run configuration")->required();
    app.add_option("--mode", mode_override,
                   "Override mode: solve|stability|metric-probe|ensemble|slln-study|markov-check");
    app.add_option("--seed", seed_override, "Override the RNG seed")
        ->each([&](const std::string&) { seed_given = true; });
    app.add_option("--out", out_override, "Override the output directory");
    app.add_option("--workers", workers_override, "Override the worker pool size");
    app.add_flag("--verbose", verbose, "Print progress and config warnings");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    nsf::RunConfig config;
    try {
        config = nsf::ingest_config(config_path);
        if (!mode_override.empty()) config.mode = nsf::parse_mode(mode_override);
        if (seed_given) {
            config.seed = seed_override;
            config.distribution.seed = seed_override;
        }
        if (!out_override.empty()) config.out_dir = out_override;
        if (workers_override > 0) config.workers = workers_override;
    } catch (const nsf::ConfigRejected& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    }

    if (verbose) {
        for (const auto& w : config.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
        std::fprintf(stderr, "mode=%s seed=%llu workers=%d out=%s\n",
                     nsf::mode_name(config.mode).c_str(),
                     static_cast<unsigned long long>(config.seed), config.workers,
                     config.out_dir.c_str());
    }

    try {
        nsf::RunManifest manifest = nsf::run(config);
        if (verbose) {
            std::fprintf(stderr, "wall time %.3f s, %zu output files\n", manifest.wall_seconds,
                         manifest.files.size());
        }
        std::printf("%s\n", manifest.config_hash.c_str());
        return 0;
    } catch (const nsf::ConfigRejected& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
}
