#pragma once

#include <complex>
#include <optional>

#include <Eigen/Dense>

#include "landau/spectral.hpp"

namespace landau {

/// Flux-insertion point on the dual lattice Z^2* = (1/2,1/2) + Z^2.
struct GaugeFluxCenter {
    double a1 = 0.5;
    double a2 = 0.5;

    static GaugeFluxCenter make(double a1, double a2);
};

/// gamma_a(x) = (x1-a1 + i(x2-a2)) / |x-a|; unimodular, denominator >= sqrt(2)/2.
std::complex<double> gauge_phase(const GaugeFluxCenter& a, double x1, double x2);

enum class HallMethod { KuboStreda, LatticeSum, IndexPair };

struct HallResult {
    double value = 0.0;
    std::complex<double> raw;
    HallMethod method = HallMethod::KuboStreda;
    double imag_residual = 0.0;
    double integrality_residual = 0.0;
    bool indeterminate = false;               // residual in (0.05, 0.2]
    std::optional<double> tail_sensitivity;   // lattice-sum only
    std::optional<double> schatten3;          // index only: |P - Gamma P Gamma*|_3
};

/// Kubo-Streda double commutator, bulk-window average of
/// -2*pi*i <x| P [[P,X1],[P,X2]] |x>. Open boundaries only.
HallResult hall_kubo_streda(const FermiProjection& p, const LatticeGeometry& geom,
                            const TraceWindow& window);

/// Real-space sum -2*pi*i sum_{|u|,|v|<=radius} (u1 v2 - u2 v1)
/// P_{x,x+u} P_{x+u,x+v} P_{x+v,x}, averaged over window sites.
HallResult hall_lattice_sum(const FermiProjection& p, const LatticeGeometry& geom,
                            const TraceWindow& window, int radius);

/// Index of the projection pair (P, Gamma_a P Gamma_a*) = Re tr (P - Q)^3.
HallResult index_pair(const FermiProjection& p, const LatticeGeometry& geom,
                      const GaugeFluxCenter& a);

/// Gamma_a P Gamma_a*, entrywise gamma_a(x) P_{xy} conj(gamma_a(y)).
Eigen::MatrixXcd conjugated_projection(const FermiProjection& p,
                                       const LatticeGeometry& geom,
                                       const GaugeFluxCenter& a);

/// Schatten p-norm (sum of sigma_i^p)^(1/p); p = infinity gives the operator norm.
double schatten_norm(const Eigen::MatrixXcd& t, double p);

struct ConnesResult {
    std::complex<double> value;   // Richardson-extrapolated from R and R/2
    double tail_estimate = 0.0;   // |S(R) - S(R/2)|
};

/// Truncated Connes sum over dual-lattice points |a| <= R of
/// (1 - g0 conj(gu))(1 - gu conj(gv))(1 - gv conj(g0)), g_w = gamma_a(w);
/// converges to -2*pi*i (u1 v2 - u2 v1).
ConnesResult connes_sum(const Eigen::Vector2i& u, const Eigen::Vector2i& v,
                        double r);

/// All pairs |u|, |v| <= max_norm in one pass over the dual lattice;
/// returns results indexed by [u][v] over the points enumerated by
/// connes_disc(max_norm).
std::vector<Eigen::Vector2i> connes_disc(double max_norm);
std::vector<std::vector<ConnesResult>> connes_sum_grid(double max_norm, double r);

} // namespace landau
