#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "landau/model.hpp"

namespace landau {

/// Full eigendecomposition with deterministic phase fixing.
struct SpectralData {
    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXcd eigenvectors; // columns
    double residual = 0.0;         // max |HV - V Lambda|
};

SpectralData eigendecompose(const HermitianOperator& h);

/// Spectral projection onto eigenvalues <= fermi_energy (closed interval).
struct FermiProjection {
    Eigen::MatrixXcd matrix;
    double fermi_energy = 0.0;
    int rank = 0;
    bool ill_conditioned = false; // some eigenvalue within 1e-12 of E

    int dim() const { return static_cast<int>(matrix.rows()); }
};

FermiProjection fermi_projection(const SpectralData& s, double e);

/// Bulk averaging window: square of Chebyshev radius `radius` around `center`,
/// kept at least `margin` sites away from the boundary.
struct TraceWindow {
    int cx = 0;
    int cy = 0;
    int radius = 1;
    int margin = 1;

    static TraceWindow centered(const LatticeGeometry& geom);
    void validate(const LatticeGeometry& geom) const;
    std::vector<int> site_indices(const LatticeGeometry& geom) const;
};

struct ValueWithError {
    double value = 0.0;
    double stderr_ = 0.0;
};

/// Integrated density of states N(E): ensemble-and-window average of the
/// per-site diagonal of the Fermi projection (states per site).
ValueWithError ids_estimate(std::span<const FermiProjection> projections,
                            const LatticeGeometry& geom,
                            const TraceWindow& window);

struct BandInterval {
    int n = 1;
    double lower = 0.0;
    double upper = 0.0;
};

/// Disordered Landau bands [B_n - lambda*M1, B_n + lambda*M2].
std::vector<BandInterval> band_bounds(double b, double lambda, double m1,
                                      double m2, int n_max);

/// Disjoint-bands condition lambda (M1 + M2) < 2B (strict).
bool gap_open(double b, double lambda, double m1, double m2);

/// All internal gaps closed: lambda (M1 + M2) U_- >= 2B.
bool gap_all_closed(double b, double lambda, double m1, double m2,
                    double u_minus);

enum class EdgeSide { Plus, Minus };

struct BandEdgeResult {
    double energy = 0.0;       // bisection value
    double direct = 0.0;       // eigenvalue from direct diagonalization
    bool saturated = false;    // edge reached the far Landau level
};

/// Extremal impurity-band edge E_+/-(n, B, lambda) of H_B + lambda*V for the
/// constant-sign potential (omega = M2 everywhere for Plus, -M1 for Minus),
/// located by bisection on lambda * r+(E) = 1 with
/// r+(E) = max eig of -sqrt(V) (H_B - E)^{-1} sqrt(V), and cross-checked
/// against direct diagonalization.
BandEdgeResult birman_schwinger_edge(int n, double b, double lambda,
                                     const LLLBasisSpec& spec,
                                     const DisorderModel& disorder,
                                     EdgeSide side);

} // namespace landau
