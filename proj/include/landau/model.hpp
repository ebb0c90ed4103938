#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "landau/errors.hpp"

namespace landau {

using json = nlohmann::json;

enum class Boundary { Open, MagneticPeriodic };

/// Finite rectangular sample of the square lattice.
struct LatticeGeometry {
    int lx = 0;
    int ly = 0;
    Boundary boundary = Boundary::Open;

    int n_sites() const { return lx * ly; }
    int site_index(int x, int y) const { return x + lx * y; }
    void validate() const;
};

/// Flux per plaquette alpha = p/q in units of the flux quantum,
/// reduced, with 0 <= p/q < 1.
struct FluxRational {
    int p = 0;
    int q = 1;

    static FluxRational make(int p, int q);
    double alpha() const { return static_cast<double>(p) / q; }
};

enum class DisorderKind { Uniform, PolynomialEta, Constant };

/// i.i.d. on-site amplitudes omega_i in [-m1, m2], coupled with strength lambda.
/// PolynomialEta draws from rho(s) = ((eta+1)/2)(1-|s|)^eta on [-1,1],
/// rescaled affinely onto [-m1, m2].
struct DisorderModel {
    double m1 = 1.0;
    double m2 = 1.0;
    double lambda = 0.0;
    DisorderKind kind = DisorderKind::Uniform;
    double eta = 1.0;  // PolynomialEta only
    double c = 0.0;    // Constant only

    void validate() const;
};

struct DisorderRealization {
    std::uint64_t seed = 0;
    std::vector<double> omega;
};

DisorderRealization sample_disorder(const DisorderModel& model, int n_sites,
                                    std::uint64_t seed);

/// Dense self-adjoint finite-volume Hamiltonian plus provenance metadata.
struct HermitianOperator {
    Eigen::MatrixXcd entries;
    json meta;

    int dim() const { return static_cast<int>(entries.rows()); }
    double hermiticity_defect() const;
};

enum class Gauge { Landau, Symmetric };

HermitianOperator build_hofstadter(const LatticeGeometry& geom,
                                   const FluxRational& flux,
                                   const DisorderModel& disorder,
                                   const DisorderRealization& realization,
                                   Gauge gauge = Gauge::Landau);

enum class SiteProfileKind { Flat, Dimple };

/// Single-site bump u tiling the disorder cells. Flat is the indicator of one
/// cell, so U = sum_i u(.-i) = 1 everywhere (U_- = 1). Dimple keeps compact
/// support in one cell but dips to (1-depth) at the cell edge, U_- = (1-depth)^2.
struct SiteProfile {
    SiteProfileKind kind = SiteProfileKind::Flat;
    double depth = 0.0;  // Dimple only, in (0,1)

    double u_minus() const;
    double value(double sx, double sy) const;  // sx,sy in [-1/2,1/2) cell units
};

/// Truncated Landau-level basis on a square torus threaded by n_phi flux quanta.
struct LLLBasisSpec {
    double b = 1.0;  // field strength
    int n_max = 1;   // Landau levels retained
    int n_phi = 8;   // flux quanta through the torus
    SiteProfile profile;
    double quad_spacing = 0.05;  // quadrature grid step, magnetic lengths
    int dim_cap = 4096;

    int dim() const { return n_max * n_phi; }
    double torus_side() const;
    int cells_per_side() const;  // disorder lattice, cells of ~unit area
    int n_cells() const { int c = cells_per_side(); return c * c; }
    void validate() const;
};

/// Matrix of the profile-summed potential sum_i omega_i u(.-i) in the
/// (quadrature-orthonormalized) truncated Landau basis. Positive quadrature
/// weights keep the operator bounds -max|omega| <= V <= max|omega| exact.
Eigen::MatrixXcd lll_potential_matrix(const LLLBasisSpec& spec,
                                      const std::vector<double>& omega);

HermitianOperator build_lll(const LLLBasisSpec& spec,
                            const DisorderModel& disorder,
                            const DisorderRealization& realization);

/// Landau levels B_n = (2n-1)B, n = 1..n_max.
std::vector<double> landau_levels(double b, int n_max);

/// Unitary implementing the covariance relation U_a H(omega) U_a* = H(tau_a omega)
/// on the magnetic torus; a must lie on the magnetic superlattice (alpha*a1 integer).
Eigen::MatrixXcd magnetic_translation(const LatticeGeometry& geom,
                                      const FluxRational& flux,
                                      int a1, int a2);

/// Disorder amplitudes shifted by a: (tau_a omega)_r = omega_{r-a}, wrapped.
std::vector<double> shift_disorder(const LatticeGeometry& geom,
                                   const std::vector<double>& omega,
                                   int a1, int a2);

/// Union of the two supported model families, for ensemble/CLI plumbing.
struct ModelConfig {
    enum class Type { Hofstadter, LLL } type = Type::Hofstadter;
    LatticeGeometry geom;
    FluxRational flux;
    LLLBasisSpec lll;
    DisorderModel disorder;

    int n_disorder_sites() const;
    HermitianOperator build(const DisorderRealization& realization) const;
    json describe() const;
};

} // namespace landau
