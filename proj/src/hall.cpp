#include "landau/hall.hpp"

#include <cmath>
#include <numbers>

namespace landau {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
const std::complex<double> minus_2pi_i(0.0, -two_pi);

void finish(HallResult& r) {
    r.value = r.raw.real();
    r.imag_residual = std::abs(r.raw.imag());
    r.integrality_residual = std::abs(r.value - std::round(r.value));
    r.indeterminate =
        r.integrality_residual > 0.05 && r.integrality_residual <= 0.2;
}

} // namespace

GaugeFluxCenter GaugeFluxCenter::make(double a1, double a2) {
    auto half_integer = [](double v) {
        return std::abs(v - 0.5 - std::round(v - 0.5)) < 1e-9;
    };
    if (!half_integer(a1) || !half_integer(a2))
        throw argument_error("gauge flux center must lie on the dual lattice "
                             "(half-integer components)");
    return GaugeFluxCenter{a1, a2};
}

std::complex<double> gauge_phase(const GaugeFluxCenter& a, double x1, double x2) {
    const double d1 = x1 - a.a1;
    const double d2 = x2 - a.a2;
    const double norm = std::hypot(d1, d2);
    // orientation chosen so the index of (P, Gamma P Gamma*) matches dN/dalpha
    return std::complex<double>(d1, d2) / norm;
}

HallResult hall_kubo_streda(const FermiProjection& p, const LatticeGeometry& geom,
                            const TraceWindow& window) {
    if (geom.boundary != Boundary::Open)
        throw geometry_error(
            "hall_kubo_streda needs open boundaries (position operators)");
    if (p.dim() != geom.n_sites())
        throw argument_error("projection does not match geometry");
    const std::vector<int> sites = window.site_indices(geom);

    Eigen::VectorXd x1(geom.n_sites()), x2(geom.n_sites());
    for (int y = 0; y < geom.ly; ++y)
        for (int x = 0; x < geom.lx; ++x) {
            x1[geom.site_index(x, y)] = x;
            x2[geom.site_index(x, y)] = y;
        }

    const Eigen::MatrixXcd& pm = p.matrix;
    Eigen::MatrixXcd c1 = pm * x1.asDiagonal() - x1.asDiagonal() * pm;
    Eigen::MatrixXcd c2 = pm * x2.asDiagonal() - x2.asDiagonal() * pm;
    // commutator orientation matched to dN/dalpha (Streda) and to the index
    Eigen::MatrixXcd core = pm * (c2 * c1 - c1 * c2);

    std::complex<double> acc = 0.0;
    for (int s : sites) acc += core(s, s);
    acc /= static_cast<double>(sites.size());

    HallResult r;
    r.method = HallMethod::KuboStreda;
    r.raw = minus_2pi_i * acc;
    finish(r);
    return r;
}

namespace {

std::complex<double> lattice_sum_at_radius(const Eigen::MatrixXcd& pm,
                                           const LatticeGeometry& geom,
                                           const std::vector<int>& sites,
                                           int radius) {
    // Displacements with |u| <= radius (Euclidean).
    std::vector<Eigen::Vector2i> disp;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            if (dx * dx + dy * dy <= radius * radius) disp.emplace_back(dx, dy);

    std::complex<double> acc = 0.0;
    for (int s : sites) {
        const int x = s % geom.lx, y = s / geom.lx;
        std::complex<double> site_acc = 0.0;
        for (const auto& u : disp) {
            const int su = geom.site_index(x + u[0], y + u[1]);
            const std::complex<double> p_xu = pm(s, su);
            if (std::abs(p_xu) < 1e-15) continue;
            for (const auto& v : disp) {
                // weight orientation matched to dN/dalpha, as in the trace form
                const double w = double(u[1]) * v[0] - double(u[0]) * v[1];
                if (w == 0.0) continue;
                const int sv = geom.site_index(x + v[0], y + v[1]);
                site_acc += w * p_xu * pm(su, sv) * pm(sv, s);
            }
        }
        acc += site_acc;
    }
    return acc / static_cast<double>(sites.size());
}

} // namespace

HallResult hall_lattice_sum(const FermiProjection& p, const LatticeGeometry& geom,
                            const TraceWindow& window, int radius) {
    if (geom.boundary != Boundary::Open)
        throw geometry_error("hall_lattice_sum needs open boundaries");
    if (p.dim() != geom.n_sites())
        throw argument_error("projection does not match geometry");
    if (radius < 1) throw argument_error("lattice sum radius must be >= 1");
    if (radius > window.margin)
        throw geometry_error("lattice sum radius exceeds the window margin");
    const std::vector<int> sites = window.site_indices(geom);

    HallResult r;
    r.method = HallMethod::LatticeSum;
    r.raw = minus_2pi_i * lattice_sum_at_radius(p.matrix, geom, sites, radius);
    finish(r);
    if (radius > 2) {
        const std::complex<double> prev =
            minus_2pi_i * lattice_sum_at_radius(p.matrix, geom, sites, radius - 2);
        r.tail_sensitivity = std::abs(r.raw - prev);
    }
    return r;
}

Eigen::MatrixXcd conjugated_projection(const FermiProjection& p,
                                       const LatticeGeometry& geom,
                                       const GaugeFluxCenter& a) {
    if (p.dim() != geom.n_sites())
        throw argument_error("projection does not match geometry");
    Eigen::VectorXcd gamma(geom.n_sites());
    for (int y = 0; y < geom.ly; ++y)
        for (int x = 0; x < geom.lx; ++x)
            gamma[geom.site_index(x, y)] = gauge_phase(a, x, y);
    return gamma.asDiagonal() * p.matrix * gamma.conjugate().asDiagonal();
}

HallResult index_pair(const FermiProjection& p, const LatticeGeometry& geom,
                      const GaugeFluxCenter& a) {
    if (a.a1 < 0.0 || a.a1 > geom.lx - 1 || a.a2 < 0.0 || a.a2 > geom.ly - 1)
        throw geometry_error("flux center must lie inside the sample");
    Eigen::MatrixXcd t = p.matrix - conjugated_projection(p, geom, a);
    t = 0.5 * (t + t.adjoint()).eval();

    // The full trace of T^3 is identically zero on a finite sample: the
    // winding of gamma_a around a is exactly cancelled by an opposite
    // contribution along the sample boundary (or the torus seam). The bulk
    // part of the diagonal carries the index, so sum it over a disc around
    // the flux center that stays clear of the boundary.
    double bulk_radius;
    if (geom.boundary == Boundary::Open) {
        const double dist = std::min({a.a1, a.a2, geom.lx - 1.0 - a.a1,
                                      geom.ly - 1.0 - a.a2});
        bulk_radius = dist - 2.0;
    } else {
        bulk_radius = 0.5 * std::min(geom.lx, geom.ly) - 3.0;
    }
    if (bulk_radius < 1.5)
        throw geometry_error("index_pair: flux center too close to the boundary");

    Eigen::MatrixXcd t2 = t * t;
    std::complex<double> acc = 0.0;
    for (int y = 0; y < geom.ly; ++y)
        for (int x = 0; x < geom.lx; ++x) {
            const double dx = x - a.a1, dy = y - a.a2;
            if (dx * dx + dy * dy > bulk_radius * bulk_radius) continue;
            const int i = geom.site_index(x, y);
            acc += (t2.row(i) * t.col(i)).value();
        }

    HallResult r;
    r.method = HallMethod::IndexPair;
    r.raw = acc;

    // Schatten-3 norm of the full T: for self-adjoint T, |T|_3^3 = sum |lambda|^3.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(t, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = es.eigenvalues();
    double s3 = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        s3 += std::abs(ev[i] * ev[i] * ev[i]);
    r.schatten3 = std::cbrt(s3);
    finish(r);
    return r;
}

double schatten_norm(const Eigen::MatrixXcd& t, double p) {
    if (!(p >= 1.0))
        throw argument_error("schatten_norm requires p >= 1");
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(t);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (std::isinf(p)) return sv.size() ? sv.maxCoeff() : 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) acc += std::pow(sv[i], p);
    return std::pow(acc, 1.0 / p);
}

std::vector<Eigen::Vector2i> connes_disc(double max_norm) {
    std::vector<Eigen::Vector2i> pts;
    const int m = static_cast<int>(std::floor(max_norm));
    for (int y = -m; y <= m; ++y)
        for (int x = -m; x <= m; ++x)
            if (x * x + y * y <= max_norm * max_norm) pts.emplace_back(x, y);
    return pts;
}

std::vector<std::vector<ConnesResult>> connes_sum_grid(double max_norm, double r) {
    const std::vector<Eigen::Vector2i> pts = connes_disc(max_norm);
    const std::size_t nw = pts.size();
    if (r < 4.0 * std::max(max_norm, 1.0))
        throw argument_error("connes sum cutoff R too small for |u|,|v|");

    std::vector<std::complex<double>> s_full(nw * nw, 0.0), s_half(nw * nw, 0.0);
    std::vector<std::complex<double>> z(nw), aw(nw);
    const double r2 = r * r, rh2 = 0.25 * r * r;

    const int amax = static_cast<int>(std::ceil(r));
    for (int aj = -amax; aj <= amax; ++aj) {
        for (int ai = -amax; ai <= amax; ++ai) {
            const double a1 = ai + 0.5, a2 = aj + 0.5;
            const double an2 = a1 * a1 + a2 * a2;
            if (an2 > r2) continue;
            const bool in_half = an2 <= rh2;

            const GaugeFluxCenter a{a1, a2};
            const std::complex<double> z0 = gauge_phase(a, 0.0, 0.0);
            for (std::size_t w = 0; w < nw; ++w) {
                z[w] = gauge_phase(a, pts[w][0], pts[w][1]);
                aw[w] = 1.0 - z0 * std::conj(z[w]);
            }
            for (std::size_t i = 0; i < nw; ++i) {
                for (std::size_t j = i; j < nw; ++j) {
                    // same conjugate orientation as connes_sum
                    const std::complex<double> term =
                        std::conj(aw[i]) * (1.0 - std::conj(z[i]) * z[j]) * aw[j];
                    s_full[i * nw + j] += term;
                    if (in_half) s_half[i * nw + j] += term;
                }
            }
        }
    }

    std::vector<std::vector<ConnesResult>> out(nw, std::vector<ConnesResult>(nw));
    for (std::size_t i = 0; i < nw; ++i) {
        for (std::size_t j = i; j < nw; ++j) {
            const std::complex<double> sf = s_full[i * nw + j];
            const std::complex<double> sh = s_half[i * nw + j];
            // leading tail is O(1/R): Richardson from R and R/2
            ConnesResult cr{2.0 * sf - sh, std::abs(sf - sh)};
            out[i][j] = cr;
            out[j][i] = ConnesResult{std::conj(cr.value), cr.tail_estimate};
        }
    }
    return out;
}

ConnesResult connes_sum(const Eigen::Vector2i& u, const Eigen::Vector2i& v,
                        double r) {
    const double max_norm =
        std::max({u.cast<double>().norm(), v.cast<double>().norm(), 1.0});
    if (r < 4.0 * max_norm)
        throw argument_error("connes sum requires R >= 4*max(|u|,|v|,1)");

    std::complex<double> s_full = 0.0, s_half = 0.0;
    const double r2 = r * r, rh2 = 0.25 * r * r;
    const int amax = static_cast<int>(std::ceil(r));
    for (int aj = -amax; aj <= amax; ++aj) {
        for (int ai = -amax; ai <= amax; ++ai) {
            const double a1 = ai + 0.5, a2 = aj + 0.5;
            const double an2 = a1 * a1 + a2 * a2;
            if (an2 > r2) continue;
            const GaugeFluxCenter a{a1, a2};
            const std::complex<double> g0 = gauge_phase(a, 0.0, 0.0);
            const std::complex<double> gu = gauge_phase(a, u[0], u[1]);
            const std::complex<double> gv = gauge_phase(a, v[0], v[1]);
            // conjugate orientation: makes the limit -2*pi*i*(u1 v2 - u2 v1)
            const std::complex<double> term = (1.0 - std::conj(g0) * gu) *
                                              (1.0 - std::conj(gu) * gv) *
                                              (1.0 - std::conj(gv) * g0);
            s_full += term;
            if (an2 <= rh2) s_half += term;
        }
    }
    return ConnesResult{2.0 * s_full - s_half, std::abs(s_full - s_half)};
}

} // namespace landau
