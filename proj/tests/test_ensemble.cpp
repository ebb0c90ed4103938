#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "landau/ensemble.hpp"

using namespace landau;

namespace {

EnsembleSpec small_spec() {
    EnsembleSpec spec;
    spec.model.type = ModelConfig::Type::Hofstadter;
    spec.model.geom = {10, 10, Boundary::Open};
    spec.model.flux = FluxRational::make(1, 5);
    spec.model.disorder.lambda = 0.4;
    spec.n_realizations = 4;
    spec.base_seed = 77;
    spec.energies = {-2.0, 0.0, 2.0};
    spec.observables = {"ids"};
    return spec;
}

} // namespace

TEST_CASE("pairwise sum equals sequential sum") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> xs(1000);
    for (double& x : xs) x = u(rng);
    const double seq = std::accumulate(xs.begin(), xs.end(), 0.0);
    CHECK(pairwise_sum(xs) == doctest::Approx(seq).epsilon(1e-12));
    CHECK(pairwise_sum(xs) == pairwise_sum(xs));
    CHECK(pairwise_sum(std::span<const double>{}) == 0.0);
}

TEST_CASE("spec validation rejects bad inputs") {
    EnsembleSpec spec = small_spec();
    spec.observables = {"idz"};
    CHECK_THROWS_AS(run_ensemble(spec), argument_error);

    spec = small_spec();
    spec.observables = {"edges"}; // needs the LLL model
    CHECK_THROWS_AS(run_ensemble(spec), argument_error);

    spec = small_spec();
    spec.energies.clear();
    CHECK_THROWS_AS(run_ensemble(spec), argument_error);

    spec = small_spec();
    spec.n_realizations = 0;
    CHECK_THROWS_AS(run_ensemble(spec), argument_error);
}

TEST_CASE("single constant-disorder realization has zero stderr") {
    EnsembleSpec spec = small_spec();
    spec.model.disorder.kind = DisorderKind::Constant;
    spec.model.disorder.c = 0.5;
    spec.n_realizations = 1;
    const auto stats = run_ensemble(spec);
    REQUIRE(stats.points.size() == 3);
    for (const auto& p : stats.points) {
        CHECK(p.failures.empty());
        const auto& ids = p.observables.at("ids");
        CHECK(ids.count == 1);
        CHECK(ids.stderr_ == 0.0);
    }
}

TEST_CASE("ensemble output is deterministic and worker-independent") {
    const EnsembleSpec spec = small_spec();
    const auto a = run_ensemble(spec, 1);
    const auto b = run_ensemble(spec, 1);
    const auto c = run_ensemble(spec, 4);
    REQUIRE(a.points.size() == b.points.size());
    REQUIRE(a.points.size() == c.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        const auto& oa = a.points[i].observables.at("ids");
        CHECK(oa.mean == b.points[i].observables.at("ids").mean);
        CHECK(oa.mean == c.points[i].observables.at("ids").mean);
        CHECK(oa.stderr_ == c.points[i].observables.at("ids").stderr_);
    }
    CHECK(a.seeds == c.seeds);
    for (std::size_t i = 0; i < a.seeds.size(); ++i)
        CHECK(a.seeds[i] == (spec.base_seed ^ i));
}

TEST_CASE("ids means are nondecreasing along the energy grid") {
    EnsembleSpec spec = small_spec();
    spec.energies.clear();
    for (double e = -4.0; e <= 4.0; e += 0.5) spec.energies.push_back(e);
    const auto stats = run_ensemble(spec, 2);
    double prev = -1.0;
    for (const auto& p : stats.points) {
        CHECK(p.observables.at("ids").mean >= prev);
        prev = p.observables.at("ids").mean;
    }
}

TEST_CASE("stderr shrinks roughly like 1/sqrt(n)") {
    EnsembleSpec spec = small_spec();
    spec.energies = {0.0};
    spec.n_realizations = 8;
    const double s8 =
        run_ensemble(spec, 2).points[0].observables.at("ids").stderr_;
    spec.n_realizations = 32;
    const double s32 =
        run_ensemble(spec, 2).points[0].observables.at("ids").stderr_;
    CHECK(s8 > 0.0);
    CHECK(s32 > 0.0);
    const double ratio = s8 / s32;
    CHECK(ratio > 1.0);   // must shrink
    CHECK(ratio < 4.5);   // and not implausibly fast
}

TEST_CASE("grid defaults expand to singletons and points carry parameters") {
    EnsembleSpec spec = small_spec();
    spec.lambdas = {0.1, 0.2};
    const auto stats = run_ensemble(spec, 2);
    REQUIRE(stats.points.size() == 6);
    CHECK(stats.points[0].point.lambda == 0.1);
    CHECK(stats.points[3].point.lambda == 0.2);
    for (const auto& p : stats.points) {
        CHECK(p.point.size == 10);
        CHECK(p.point.flux.q == 5);
    }
}

TEST_CASE("kernel observables pool realizations inside the q-norm") {
    EnsembleSpec spec = small_spec();
    spec.energies = {-2.5};
    spec.observables = {"kernel", "ell_q", "L_beta"};
    spec.kernel_radius = 3;
    const auto stats = run_ensemble(spec, 2);
    const auto& p = stats.points[0];
    REQUIRE(p.kernel.has_value());
    CHECK(p.kernel->raw.rows() == spec.n_realizations);
    CHECK(p.observables.at("ell_q").count == spec.n_realizations);
    CHECK(p.observables.at("ell_q").mean >= 0.0);
    CHECK(p.observables.at("L_beta").mean >= 0.0);
}

TEST_CASE("failures are isolated per grid point") {
    EnsembleSpec spec = small_spec();
    spec.observables = {"moments"};
    spec.moment_t_max = 1.0; // sampling too coarse for T -> resolution errors
    spec.moment_dt = 0.5;
    spec.moment_t_avg = 0.9;
    const auto stats = run_ensemble(spec, 2);
    CHECK(stats.any_failure());
    for (const auto& p : stats.points)
        CHECK(p.failures.size() == static_cast<std::size_t>(spec.n_realizations));
}

TEST_CASE("continuity scan validates its grid") {
    EnsembleSpec spec = small_spec();
    spec.energies = {-1.0, 0.0, 1.0};
    auto stats = run_ensemble(spec, 2);
    CHECK_THROWS_AS(continuity_scan(stats), argument_error); // < 8 points

    spec.energies = {-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.7};
    stats = run_ensemble(spec, 2);
    CHECK_THROWS_AS(continuity_scan(stats), argument_error); // non-uniform
}

TEST_CASE("continuity scan in a clean gap is degenerate") {
    EnsembleSpec spec;
    // torus geometry keeps edge states out of the clean spectral gap
    spec.model.geom = {12, 12, Boundary::MagneticPeriodic};
    spec.model.flux = FluxRational::make(1, 3);
    spec.model.disorder.kind = DisorderKind::Constant;
    spec.model.disorder.c = 0.0;
    spec.model.disorder.lambda = 0.0;
    spec.n_realizations = 1;
    spec.observables = {"ids"};
    // the clean lowest gap at flux 1/3 spans (-2, -0.73)
    for (int i = 0; i < 8; ++i) spec.energies.push_back(-1.7 + 0.1 * i);
    const auto stats = run_ensemble(spec, 1);
    const auto scan = continuity_scan(stats);
    CHECK(scan.degenerate);
    for (const auto& [h, sup] : scan.pairs) CHECK(sup == 0.0);
}

TEST_CASE("continuity scan fits a positive exponent on a disordered band") {
    EnsembleSpec spec = small_spec();
    spec.model.geom = {12, 12, Boundary::Open};
    spec.model.flux = FluxRational::make(1, 3);
    spec.model.disorder.lambda = 0.5;
    spec.n_realizations = 6;
    spec.energies.clear();
    for (int i = 0; i < 12; ++i) spec.energies.push_back(-3.2 + 0.15 * i);
    const auto stats = run_ensemble(spec, 2);
    const auto scan = continuity_scan(stats);
    CHECK(!scan.degenerate);
    CHECK(scan.delta > 0.0);
    CHECK(scan.r_squared >= 0.8);
}
