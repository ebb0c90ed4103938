// Acceptance gate: one self-contained check per criterion, each printing a
// single [PASS]/[FAIL] line with the measured numbers. Exit code is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "landau/ensemble.hpp"
#include "landau/hall.hpp"
#include "landau/localization.hpp"

using namespace landau;

namespace {

constexpr double pi = std::numbers::pi;

int g_failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << std::setw(2) << id
              << ": " << name;
    if (!detail.empty()) std::cout << "  [" << detail << "]";
    std::cout << std::endl;
    if (!ok) ++g_failures;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

// Fermi level in the middle of the lowest flux-1/3 gap, read off the bulk
// torus spectrum (open-sample spectra carry edge states inside the gap).
double mid_lowest_gap_energy(int l) {
    DisorderModel clean;
    clean.lambda = 0.0;
    LatticeGeometry torus{l, l, Boundary::MagneticPeriodic};
    const auto s = eigendecompose(build_hofstadter(
        torus, FluxRational::make(1, 3), clean,
        sample_disorder(clean, torus.n_sites(), 0)));
    const int third = static_cast<int>(s.eigenvalues.size()) / 3;
    return 0.5 * (s.eigenvalues[third - 1] + s.eigenvalues[third]);
}

FermiProjection clean_open_projection(int l, double e) {
    DisorderModel clean;
    clean.lambda = 0.0;
    LatticeGeometry geom{l, l, Boundary::Open};
    const auto s = eigendecompose(build_hofstadter(
        geom, FluxRational::make(1, 3), clean,
        sample_disorder(clean, geom.n_sites(), 0)));
    return fermi_projection(s, e);
}

// 1. Truncated Connes sums over the dual lattice reproduce -2*pi*i*(u1 v2 -
//    u2 v1) for every pair |u|,|v| <= 3 at cutoff R = 400, in under a minute.
void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto pts = connes_disc(3.0);
    const auto grid = connes_sum_grid(3.0, 400.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j) {
            const double det = double(pts[i][0]) * pts[j][1] -
                               double(pts[i][1]) * pts[j][0];
            const std::complex<double> target(0.0, -2.0 * pi * det);
            const double tol = 0.02 * 2.0 * pi * std::max(1.0, std::abs(det));
            worst = std::max(worst, std::abs(grid[i][j].value - target) / tol);
        }
    const double dt = elapsed_s(t0);
    std::ostringstream d;
    d << pts.size() * pts.size() << " pairs, worst error " << std::setprecision(3)
      << worst << "x tolerance, " << std::setprecision(3) << dt << " s";
    report(1, "Connes sums converge to -2*pi*i*det(u,v)", worst <= 1.0 && dt < 60.0,
           d.str());
}

// 2. Clean lowest-gap index on a 24x24 open sample is integral and matches
//    the flux derivative of the integrated density of states after rounding.
void criterion_2(double estar, const FermiProjection& p,
                 const LatticeGeometry& geom, HallResult& index_out) {
    const auto t0 = std::chrono::steady_clock::now();
    index_out = index_pair(p, geom, GaugeFluxCenter::make(11.5, 11.5));

    DisorderModel clean;
    clean.lambda = 0.0;
    const TraceWindow w = TraceWindow::centered(geom);
    double n_val[2];
    const FluxRational fluxes[2] = {FluxRational::make(17, 48),
                                    FluxRational::make(15, 48)};
    for (int k = 0; k < 2; ++k) {
        const auto s = eigendecompose(build_hofstadter(
            geom, fluxes[k], clean, sample_disorder(clean, geom.n_sites(), 0)));
        const FermiProjection pk = fermi_projection(s, estar);
        n_val[k] = ids_estimate({&pk, 1}, geom, w).value;
    }
    const double streda = (n_val[0] - n_val[1]) / (2.0 / 48.0);
    const double dt = elapsed_s(t0);
    const bool ok = index_out.integrality_residual <= 0.05 &&
                    std::lround(index_out.value) == std::lround(streda) &&
                    dt < 120.0;
    std::ostringstream d;
    d << "index " << std::setprecision(6) << index_out.value << " (residual "
      << std::setprecision(3) << index_out.integrality_residual
      << "), dN/dalpha " << std::setprecision(6) << streda << ", "
      << std::setprecision(3) << dt << " s";
    report(2, "lowest-gap index is integral and equals dN/dalpha", ok, d.str());
}

// 3. The Kubo double commutator, the real-space lattice sum at radius 8, and
//    the index agree on the same clean gap.
void criterion_3(const FermiProjection& p, const LatticeGeometry& geom,
                 const HallResult& index) {
    const auto kubo = hall_kubo_streda(p, geom, TraceWindow::centered(geom));
    // margin 8 keeps the radius-8 displacement disc fully inside the sample
    const auto lat = hall_lattice_sum(p, geom, TraceWindow{12, 12, 2, 8}, 8);
    const double d_idx = std::abs(kubo.value - index.value);
    const double d_lat = std::abs(kubo.value - lat.value);
    std::ostringstream d;
    d << "kubo " << std::setprecision(6) << kubo.value << ", |kubo-index| "
      << std::setprecision(3) << d_idx << ", |kubo-lattice(8)| " << d_lat;
    report(3, "Kubo, lattice-sum, and index methods agree",
           d_idx <= 0.1 && d_lat <= 0.05, d.str());
}

// 4. The Hall conductance stays on the same plateau across the disorder grid
//    lambda in {0, 0.05, ..., 0.3} with the gap open (20 realizations each).
void criterion_4(double estar) {
    LatticeGeometry geom{18, 18, Boundary::Open};
    const GaugeFluxCenter a = GaugeFluxCenter::make(8.5, 8.5);
    double mean_min = 1e9, mean_max = -1e9, worst_residual = 0.0;
    for (int k = 0; k <= 6; ++k) {
        DisorderModel d;
        d.lambda = 0.05 * k;
        double sum = 0.0;
        for (unsigned seed = 0; seed < 20; ++seed) {
            const auto s = eigendecompose(build_hofstadter(
                geom, FluxRational::make(1, 3), d,
                sample_disorder(d, geom.n_sites(), seed)));
            const auto r = index_pair(fermi_projection(s, estar), geom, a);
            sum += r.value;
            worst_residual = std::max(worst_residual, r.integrality_residual);
        }
        const double mean = sum / 20.0;
        mean_min = std::min(mean_min, mean);
        mean_max = std::max(mean_max, mean);
    }
    std::ostringstream d;
    d << "spread " << std::setprecision(3) << mean_max - mean_min
      << ", worst residual " << worst_residual;
    report(4, "Hall conductance constant across the disorder grid",
           mean_max - mean_min <= 0.1 && worst_residual <= 0.1, d.str());
}

// 5. Disordered lowest-Landau-level spectra (n_max = 3, B = 1, lambda = 0.5)
//    stay inside the broadened bands [2n-1 - 0.5, 2n-1 + 0.5].
void criterion_5() {
    LLLBasisSpec spec;
    spec.b = 1.0;
    spec.n_max = 3;
    DisorderModel d;
    d.lambda = 0.5;
    const auto bands = band_bounds(1.0, 0.5, 1.0, 1.0, 3);
    int n_eigs = 0;
    double worst = 0.0;
    for (unsigned seed = 0; seed < 20; ++seed) {
        const auto s = eigendecompose(
            build_lll(spec, d, sample_disorder(d, spec.n_cells(), seed)));
        for (double e : s.eigenvalues) {
            ++n_eigs;
            double dist = 1e9;
            for (const auto& b : bands)
                dist = std::min(dist, std::max({b.lower - e, e - b.upper, 0.0}));
            worst = std::max(worst, dist);
        }
    }
    std::ostringstream msg;
    msg << n_eigs << " eigenvalues, worst excursion " << std::setprecision(3)
        << worst;
    report(5, "disordered Landau spectra confined to the broadened bands",
           worst <= 1e-6, msg.str());
}

// 6. Birman-Schwinger bisection: E_+(1, B=1, lambda) = 1 + lambda exactly for
//    the flat profile, agrees with direct diagonalization, and both edges
//    move monotonically with lambda.
void criterion_6() {
    LLLBasisSpec spec;
    spec.b = 1.0;
    spec.n_max = 3;
    DisorderModel d;
    bool ok = true;
    std::ostringstream msg;
    double prev_plus = -1e9, prev_minus = 1e9;
    for (double lambda : {0.1, 0.5, 1.0}) {
        const auto plus =
            birman_schwinger_edge(1, 1.0, lambda, spec, d, EdgeSide::Plus);
        const auto minus =
            birman_schwinger_edge(1, 1.0, lambda, spec, d, EdgeSide::Minus);
        ok = ok && std::abs(plus.energy - (1.0 + lambda)) <= 1e-6 &&
             std::abs(plus.energy - plus.direct) <= 1e-6 &&
             std::abs(minus.energy - minus.direct) <= 1e-6 &&
             plus.energy >= prev_plus && minus.energy <= prev_minus;
        prev_plus = plus.energy;
        prev_minus = minus.energy;
        msg << "E+(" << lambda << ")=" << std::setprecision(8) << plus.energy
            << " ";
    }
    report(6, "band-edge bisection matches the exact shift and direct spectra",
           ok, msg.str());
}

// 7. Gap predicates reproduce their boundary truth tables exactly.
void criterion_7() {
    const bool ok = gap_open(1.0, 0.9, 1.0, 1.0) == true &&
                    gap_open(1.0, 1.0, 1.0, 1.0) == false &&
                    gap_open(1.0, 0.0, 1.0, 1.0) == true &&
                    gap_all_closed(1.0, 2.0, 1.0, 1.0, 1.0) == true &&
                    gap_all_closed(1.0, 2.0, 1.0, 1.0, 0.4) == false &&
                    gap_all_closed(1.0, 0.0, 1.0, 1.0, 1.0) == false;
    report(7, "gap predicates reproduce the boundary truth tables", ok, "");
}

// 8. The clean gapped kernel decays exponentially (envelope fit R^2 >= 0.95)
//    with a sub-1% truncation tail at radius 10.
void criterion_8(double estar) {
    DisorderModel clean;
    clean.lambda = 0.0;
    LatticeGeometry torus{24, 24, Boundary::MagneticPeriodic};
    const auto s = eigendecompose(build_hofstadter(
        torus, FluxRational::make(1, 3), clean,
        sample_disorder(clean, torus.n_sites(), 0)));
    const FermiProjection p = fermi_projection(s, estar);
    const auto prof = kernel_decay({&p, 1}, torus, {12, 12}, 10);
    const auto fit = decay_rate_fit(prof);
    const auto ell = ell_q(prof, 2.0);
    const double tail_frac = ell.tail_sensitivity / ell.value;
    const bool ok = fit.model == DecayFit::Model::Exponential && fit.rate > 0.0 &&
                    fit.r_squared >= 0.95 && tail_frac <= 0.01;
    std::ostringstream d;
    d << "rate " << std::setprecision(3) << fit.rate << ", R^2 "
      << fit.r_squared << ", tail " << 100.0 * tail_frac << "%";
    report(8, "gapped kernel decays exponentially with small tail", ok, d.str());
}

// 9. The ell_2 localization proxy peaks strictly inside the disordered band
//    and grows by >= 1.3x from 18x18 to 30x30, within the time budget.
void criterion_9() {
    const auto t0 = std::chrono::steady_clock::now();
    DivergenceScanSpec spec;
    spec.flux = FluxRational::make(1, 3);
    spec.disorder.lambda = 0.3;
    spec.sizes = {18, 30};
    for (int i = 0; i < 15; ++i)
        spec.energies.push_back(-3.0 + i * (1.25 / 14.0));
    spec.n_realizations = 20;
    spec.base_seed = 2026;
    spec.max_radius = 14;
    const auto r = divergence_scan(spec);
    const double dt = elapsed_s(t0);
    const bool interior = r.e_star > spec.energies.front() &&
                          r.e_star < spec.energies.back();
    const bool ok =
        r.growth_defined && interior && r.growth_factor >= 1.3 && dt < 1800.0;
    std::ostringstream d;
    d << "peak at E=" << std::setprecision(4) << r.e_star << ", growth "
      << std::setprecision(3) << r.growth_factor << ", " << dt << " s";
    report(9, "localization proxy peaks in-band and grows with size", ok, d.str());
}

// 10. Magnetic translation covariance U_a H(w) U_a* = H(tau_a w) holds
//     entrywise to 1e-10 on 50 random (disorder, shift) pairs.
void criterion_10() {
    LatticeGeometry torus{12, 12, Boundary::MagneticPeriodic};
    const FluxRational flux = FluxRational::make(1, 3);
    DisorderModel d;
    d.lambda = 1.0;
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> pick_a1(0, 3);   // multiples of q = 3
    std::uniform_int_distribution<int> pick_a2(0, 11);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto real = sample_disorder(d, torus.n_sites(), rng());
        const int a1 = 3 * pick_a1(rng), a2 = pick_a2(rng);
        const Eigen::MatrixXcd u = magnetic_translation(torus, flux, a1, a2);
        const auto h = build_hofstadter(torus, flux, d, real);
        const DisorderRealization shifted{
            real.seed, shift_disorder(torus, real.omega, a1, a2)};
        const auto ht = build_hofstadter(torus, flux, d, shifted);
        worst = std::max(
            worst,
            (u * h.entries * u.adjoint() - ht.entries).cwiseAbs().maxCoeff());
    }
    std::ostringstream msg;
    msg << "worst entrywise defect " << std::setprecision(3) << worst;
    report(10, "magnetic translation covariance identity", worst <= 1e-10,
           msg.str());
}

// 11. The index does not depend on the flux-insertion point: spread over 5
//     bulk choices of a is <= 0.05 on 50 gapped disordered projections, and
//     the integrality residual is <= 0.05 whenever |P - GPG*|_3 <= 1.
void criterion_11(double estar) {
    LatticeGeometry geom{18, 18, Boundary::Open};
    DisorderModel d;
    d.lambda = 0.2;
    const std::vector<GaugeFluxCenter> as = {
        {8.5, 8.5}, {7.5, 8.5}, {8.5, 7.5}, {9.5, 8.5}, {8.5, 9.5}};
    double worst_spread = 0.0, worst_residual_small_t = 0.0;
    for (unsigned seed = 0; seed < 50; ++seed) {
        const auto s = eigendecompose(build_hofstadter(
            geom, FluxRational::make(1, 3), d,
            sample_disorder(d, geom.n_sites(), seed)));
        const FermiProjection p = fermi_projection(s, estar);
        double lo = 1e9, hi = -1e9;
        for (const auto& a : as) {
            const auto r = index_pair(p, geom, a);
            lo = std::min(lo, r.value);
            hi = std::max(hi, r.value);
            if (r.schatten3.value_or(2.0) <= 1.0)
                worst_residual_small_t =
                    std::max(worst_residual_small_t, r.integrality_residual);
        }
        worst_spread = std::max(worst_spread, hi - lo);
    }
    std::ostringstream msg;
    msg << "worst a-spread " << std::setprecision(3) << worst_spread
        << ", worst residual at |T|_3<=1: " << worst_residual_small_t;
    report(11, "index independent of the flux-insertion point",
           worst_spread <= 0.05 && worst_residual_small_t <= 0.05, msg.str());
}

// 12. Time-averaged second moments: bounded in a spectral gap (<= 2x between
//     T = 50 and T = 500) while growing >= 3x for a weakly disordered band
//     window on a 30x30 sample.
void criterion_12() {
    std::vector<double> times;
    for (double t = 0.0; t <= 2000.0; t += 5.0) times.push_back(t);
    LatticeGeometry geom{30, 30, Boundary::Open};

    // band window: the whole lowest flux-1/5 band (read off the clean torus)
    DisorderModel clean;
    clean.lambda = 0.0;
    LatticeGeometry torus{30, 30, Boundary::MagneticPeriodic};
    const auto ts = eigendecompose(build_hofstadter(
        torus, FluxRational::make(1, 5), clean,
        sample_disorder(clean, torus.n_sites(), 0)));
    const int fifth = static_cast<int>(ts.eigenvalues.size()) / 5;
    const double lo = ts.eigenvalues[0], hi = ts.eigenvalues[fifth - 1];

    DisorderModel weak;
    weak.lambda = 0.05;
    const auto sb = eigendecompose(build_hofstadter(
        geom, FluxRational::make(1, 5), weak,
        sample_disorder(weak, geom.n_sites(), 0)));
    auto band = transport_moment(sb, geom, 2.0, {lo, hi}, times);
    time_averaged_moment(band, {50.0, 500.0});
    const double band_ratio =
        band.time_averaged[1].second / band.time_averaged[0].second;

    DisorderModel d3;
    d3.lambda = 0.3;
    const auto sg = eigendecompose(build_hofstadter(
        geom, FluxRational::make(1, 3), d3,
        sample_disorder(d3, geom.n_sites(), 0)));
    auto gap = transport_moment(sg, geom, 2.0, {-1.5, -1.23}, times);
    time_averaged_moment(gap, {50.0, 500.0});
    const double gap_ratio =
        gap.time_averaged[1].second / gap.time_averaged[0].second;

    std::ostringstream msg;
    msg << "gap ratio " << std::setprecision(3) << gap_ratio << " (<= 2), band ratio "
        << band_ratio << " (>= 3)";
    report(12, "transport moments: bounded in the gap, growing in the band",
           gap_ratio <= 2.0 && band_ratio >= 3.0, msg.str());
}

// 13. The integrated density of states on a disordered band is exactly
//     nondecreasing and admits a Hoelder fit with positive exponent.
void criterion_13() {
    EnsembleSpec spec;
    spec.model.type = ModelConfig::Type::Hofstadter;
    spec.model.geom = {12, 12, Boundary::Open};
    spec.model.flux = FluxRational::make(1, 3);
    spec.model.disorder.lambda = 0.5;
    spec.n_realizations = 6;
    spec.base_seed = 77;
    for (int i = 0; i < 12; ++i) spec.energies.push_back(-3.2 + 0.15 * i);
    spec.observables = {"ids"};
    const auto stats = run_ensemble(spec, 2);
    bool nondecreasing = true;
    double prev = -1.0;
    for (const auto& p : stats.points) {
        const double n = p.observables.at("ids").mean;
        nondecreasing = nondecreasing && n >= prev;
        prev = n;
    }
    const auto scan = continuity_scan(stats);
    const bool ok = nondecreasing && !scan.degenerate && scan.delta > 0.0 &&
                    scan.r_squared >= 0.8;
    std::ostringstream msg;
    msg << "delta " << std::setprecision(3) << scan.delta << ", R^2 "
        << scan.r_squared;
    report(13, "integrated density of states is Hoelder on a disordered band",
           ok, msg.str());
}

} // namespace

int main() {
    std::cout << "acceptance gate: 13 criteria\n";
    const double estar = mid_lowest_gap_energy(24);

    criterion_1();

    const LatticeGeometry geom24{24, 24, Boundary::Open};
    const FermiProjection p24 = clean_open_projection(24, estar);
    HallResult index24;
    criterion_2(estar, p24, geom24, index24);
    criterion_3(p24, geom24, index24);
    criterion_4(estar);
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8(estar);
    criterion_9();
    criterion_10();
    criterion_11(estar);
    criterion_12();
    criterion_13();

    std::cout << (g_failures == 0 ? "all criteria passed"
                                  : std::to_string(g_failures) + " criteria failed")
              << std::endl;
    return g_failures;
}
