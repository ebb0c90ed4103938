#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "landau/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "landaulab: finite-size laboratory for Hall-conductance quantization "
        "of disordered Landau Hamiltonians"};

    std::string config_path;
    std::string out_override;
    int workers = 0;
    std::uint64_t seed_override = 0;
    bool have_seed_override = false;
    bool dry_run = false;

    app.add_option("--config", config_path, "JSON run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--workers", workers,
                   "worker threads (0 = hardware default; env LANDAULAB_WORKERS)");
    app.add_option("--out", out_override, "override the output directory");
    app.add_option("--seed-override", seed_override,
                   "override the ensemble base seed")
        ->each([&](const std::string&) { have_seed_override = true; });
    app.add_flag("--dry-run", dry_run, "validate the config and print the plan");

    CLI11_PARSE(app, argc, argv);

    if (workers == 0) {
        if (const char* env = std::getenv("LANDAULAB_WORKERS"))
            workers = std::atoi(env);
    }

    try {
        landau::RunConfig cfg = landau::parse_config(config_path);
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (have_seed_override) {
            cfg.ensemble.base_seed = seed_override;
            cfg.normalized["ensemble"]["base_seed"] = seed_override;
        }
        return landau::dispatch(cfg, workers, dry_run);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}
