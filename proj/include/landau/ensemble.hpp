#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "landau/hall.hpp"
#include "landau/localization.hpp"

namespace landau {

/// Reproducible disorder-ensemble run over a grid of
/// (energy, lambda, size, flux) points. Every grid defaults to the singleton
/// taken from the base model; realization i always uses seed base_seed XOR i.
struct EnsembleSpec {
    ModelConfig model;
    int n_realizations = 1;
    std::uint64_t base_seed = 0;

    std::vector<double> energies;       // Fermi energies (required, >= 1)
    std::vector<double> lambdas;        // default: {model.disorder.lambda}
    std::vector<int> sizes;             // default: {model lateral size}
    std::vector<FluxRational> fluxes;   // default: {model.flux}

    // from the registered set {hall, ids, kernel, ell_q, L_beta, moments, edges}
    std::vector<std::string> observables;

    int kernel_radius = 8;              // kernel / ell_q / L_beta
    double q = 2.0;                     // ell_q exponent
    double beta = 0.9;                  // L_beta exponent
    double moment_p = 2.0;              // transport moments
    double moment_window = 0.5;         // window half-width around E
    double moment_t_max = 200.0;        // sampled times 0..t_max
    double moment_dt = 2.0;
    double moment_t_avg = 50.0;         // averaging time T
    int dim_cap = 4096;

    void validate() const;
    static const std::vector<std::string>& registered_observables();
};

struct GridPoint {
    double energy = 0.0;
    double lambda = 0.0;
    int size = 0;
    FluxRational flux;
};

struct ObservableStats {
    double mean = 0.0;
    double stderr_ = 0.0;
    double min = 0.0;
    double max = 0.0;
    int count = 0;
};

struct EnsemblePointResult {
    GridPoint point;
    std::map<std::string, ObservableStats> observables;
    std::optional<KernelDecayProfile> kernel;   // pooled over the ensemble
    std::vector<std::string> failures;          // one message per failed realization
};

struct EnsembleStats {
    std::vector<EnsemblePointResult> points;
    std::vector<std::uint64_t> seeds;           // seed schedule actually used

    bool any_failure() const;
};

/// Executes the ensemble with up to `workers` concurrent realizations.
/// Aggregation uses fixed-index pairwise-tree reduction, so results are
/// bit-identical for any worker count. Per-realization numerical failures are
/// recorded at the affected grid point and never abort the run.
EnsembleStats run_ensemble(const EnsembleSpec& spec, int workers = 1);

/// Empirical modulus of continuity of N(E) (and sigma_H(E) when present)
/// across a uniform E-grid: pairs (h, sup |Delta N|) and the fitted
/// |Delta N| <= C h^delta.
struct ContinuityScan {
    std::vector<std::pair<double, double>> pairs;  // (h, sup |Delta N|)
    double c = 0.0;
    double delta = 0.0;
    double r_squared = 0.0;
    bool degenerate = false;          // all increments zero; no fit possible
    double max_delta_sigma = 0.0;     // 0 when hall was not measured
};

ContinuityScan continuity_scan(const EnsembleStats& stats);

/// Sum in fixed index order by pairwise-tree reduction (exactly associative
/// splitting, independent of worker count).
double pairwise_sum(std::span<const double> values);

} // namespace landau
