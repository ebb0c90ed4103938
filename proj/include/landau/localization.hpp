#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "landau/spectral.hpp"

namespace landau {

/// Ensemble statistics of |chi_x P chi_0| versus displacement x (on the
/// unit-cell lattice the block is a single matrix entry). Per-realization
/// values are retained so that ensemble q-norms can average inside the power.
struct KernelDecayProfile {
    std::vector<Eigen::Vector2i> displacements;
    std::vector<double> values;   // ensemble mean per displacement
    std::vector<double> stderrs;
    Eigen::Vector2i reference;
    Eigen::MatrixXd raw;          // n_realizations x n_displacements; may be empty

    bool mean_only() const { return raw.size() == 0; }
    int max_radius() const;
};

KernelDecayProfile kernel_decay(std::span<const FermiProjection> projections,
                                const LatticeGeometry& geom,
                                const Eigen::Vector2i& reference, int max_radius,
                                int margin = 0);

struct LocalizationLengthEstimate {
    double exponent = 0.0;        // q for ell_q, beta for L_beta
    double value = 0.0;
    int truncation_radius = 0;
    double tail_sensitivity = 0.0; // outermost-shell contribution
    bool from_mean_only = false;
};

/// ell_q = sum_x max{|x|,1} * (ensemble q-norm of the kernel block at x).
LocalizationLengthEstimate ell_q(const KernelDecayProfile& profile, double q);

/// L_beta = sum_x |x| * (ensemble 2-norm of the kernel block at x)^beta.
LocalizationLengthEstimate L_beta(const KernelDecayProfile& profile, double beta);

struct DecayFit {
    enum class Model { Exponential, Power } model = Model::Exponential;
    double rate = 0.0;
    double r_squared = 0.0;
};

/// Least-squares fit of log values against |x| (exponential) and log|x|
/// (power); returns whichever model explains more variance.
DecayFit decay_rate_fit(const KernelDecayProfile& profile);

/// Moments M(p,X,t) of the position spread of an initially cell-localized
/// state, energy-filtered by a C^2 bump equal to 1 on the window and
/// supported on its 1.2x dilation.
struct TransportMoment {
    double p = 2.0;
    std::vector<double> times;
    std::vector<double> values;
    std::vector<std::pair<double, double>> time_averaged; // (T, M_avg)
    bool window_empty = false;   // energy window missed the spectrum
    bool truncated = false;      // boundary weight exceeded 1%
};

TransportMoment transport_moment(const SpectralData& s,
                                 const LatticeGeometry& geom, double p,
                                 std::pair<double, double> energy_window,
                                 const std::vector<double>& times);

/// C^2 bump used for the energy filter (exposed for tests).
double energy_bump(double e, double lo, double hi);

/// Fills time_averaged with (T, (1/T) int_0^inf M(t) e^{-t/T} dt) computed by
/// exact integration of the piecewise-linear interpolant plus a constant tail.
/// Returns a quadrature error estimate (coarsened-grid difference).
double time_averaged_moment(TransportMoment& m, const std::vector<double>& t_list);

struct DivergenceScanSpec {
    FluxRational flux;
    DisorderModel disorder;
    std::vector<int> sizes;          // square samples, open boundary
    std::vector<double> energies;
    int n_realizations = 1;
    std::uint64_t base_seed = 0;
    int max_radius = 8;
};

struct DivergenceScanRow {
    double energy = 0.0;
    int size = 0;
    double ell2 = 0.0;
};

struct DivergenceScanResult {
    std::vector<DivergenceScanRow> rows;
    double e_star = 0.0;          // argmax of ell2 at the largest size
    double growth_factor = 1.0;   // ell2(E*, L_max) / ell2(E*, L_min)
    bool growth_defined = false;  // needs >= 2 sizes
};

DivergenceScanResult divergence_scan(const DivergenceScanSpec& spec);

} // namespace landau
