#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "landau/ensemble.hpp"

namespace landau {

enum class Experiment {
    Spectrum,
    Hall,
    Localization,
    Transport,
    ConnesCheck,
    BandEdges,
    Sweep
};

std::string experiment_name(Experiment e);

/// Fully validated run description. Parsing is strict: unknown keys are
/// rejected (with a nearest-key suggestion) and all violations are collected
/// before reporting.
struct RunConfig {
    Experiment experiment = Experiment::Spectrum;
    EnsembleSpec ensemble;

    // connes-check block
    Eigen::Vector2i connes_u{1, 0};
    Eigen::Vector2i connes_v{0, 1};
    double connes_r = 400.0;

    // band-edges block
    int edge_level = 1;
    std::vector<double> edge_lambdas;

    std::filesystem::path out_dir = "out";
    double integer_threshold = 0.05;

    json normalized;                      // config with defaults filled in
    std::vector<std::string> defaulted;   // dotted paths of defaulted keys
};

/// Raised by parse_config with every violation found, one per line.
struct config_error : argument_error {
    std::vector<std::string> violations;
    explicit config_error(std::vector<std::string> v);
};

RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_json(const json& root);

/// FNV-1a 64-bit digest (used for config digests and file checksums).
std::uint64_t fnv1a64(std::string_view bytes);

/// Runs the configured experiment, writing CSV data files, a long-format
/// plot-ready CSV, and manifest.json into out_dir. Returns the process exit
/// status: 0 success, 2 partial ensemble failure, 1 fatal error.
int dispatch(const RunConfig& config, int workers, bool dry_run = false);

} // namespace landau
