#include "landau/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace landau {

SpectralData eigendecompose(const HermitianOperator& h) {
    const double scale = h.entries.cwiseAbs().maxCoeff();
    if (h.hermiticity_defect() > 1e-10 * std::max(1.0, scale))
        throw argument_error("eigendecompose: operator is not self-adjoint");

    Eigen::MatrixXcd sym = 0.5 * (h.entries + h.entries.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sym);
    if (es.info() != Eigen::Success)
        throw numerical_error("eigensolver failed to converge", -1.0);

    SpectralData s;
    s.eigenvalues = es.eigenvalues();
    s.eigenvectors = es.eigenvectors();

    // Deterministic phase convention: first significant component of every
    // eigenvector is made real positive.
    for (Eigen::Index c = 0; c < s.eigenvectors.cols(); ++c) {
        auto col = s.eigenvectors.col(c);
        const double thr = 1e-8 * col.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < col.size(); ++i) {
            const double a = std::abs(col[i]);
            if (a > thr) {
                col *= std::conj(col[i]) / a;
                break;
            }
        }
    }

    s.residual = (sym * s.eigenvectors -
                  s.eigenvectors * s.eigenvalues.asDiagonal())
                     .cwiseAbs()
                     .maxCoeff();
    if (s.residual > 1e-9 * std::max(1.0, scale))
        throw numerical_error("eigendecomposition residual too large", s.residual);
    return s;
}

FermiProjection fermi_projection(const SpectralData& s, double e) {
    FermiProjection p;
    p.fermi_energy = e;
    const Eigen::Index dim = s.eigenvalues.size();
    Eigen::Index k = 0;
    while (k < dim && s.eigenvalues[k] <= e) ++k;
    p.rank = static_cast<int>(k);
    for (Eigen::Index i = 0; i < dim; ++i)
        if (std::abs(s.eigenvalues[i] - e) < 1e-12) p.ill_conditioned = true;

    if (k == 0) {
        p.matrix = Eigen::MatrixXcd::Zero(dim, dim);
    } else {
        auto occ = s.eigenvectors.leftCols(k);
        p.matrix = occ * occ.adjoint();
        p.matrix = 0.5 * (p.matrix + p.matrix.adjoint()).eval();
    }
    return p;
}

TraceWindow TraceWindow::centered(const LatticeGeometry& geom) {
    TraceWindow w;
    w.cx = geom.lx / 2;
    w.cy = geom.ly / 2;
    w.margin = std::max(1, geom.lx / 4);
    const int room = std::min({w.cx, w.cy, geom.lx - 1 - w.cx, geom.ly - 1 - w.cy});
    w.radius = std::max(1, room - w.margin);
    return w;
}

void TraceWindow::validate(const LatticeGeometry& geom) const {
    if (radius < 1 || margin < 1)
        throw geometry_error("trace window needs radius >= 1 and margin >= 1");
    if (cx - radius < margin || cy - radius < margin ||
        cx + radius > geom.lx - 1 - margin || cy + radius > geom.ly - 1 - margin)
        throw geometry_error("trace window plus margin leaves the sample bulk");
}

std::vector<int> TraceWindow::site_indices(const LatticeGeometry& geom) const {
    validate(geom);
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(2 * radius + 1) * (2 * radius + 1));
    for (int y = cy - radius; y <= cy + radius; ++y)
        for (int x = cx - radius; x <= cx + radius; ++x)
            out.push_back(geom.site_index(x, y));
    return out;
}

ValueWithError ids_estimate(std::span<const FermiProjection> projections,
                            const LatticeGeometry& geom,
                            const TraceWindow& window) {
    if (projections.empty())
        throw argument_error("ids_estimate: empty projection ensemble");
    const std::vector<int> sites = window.site_indices(geom);
    std::vector<double> per_realization;
    per_realization.reserve(projections.size());
    for (const FermiProjection& p : projections) {
        if (p.dim() != geom.n_sites())
            throw argument_error("ids_estimate: projection does not match geometry");
        double acc = 0.0;
        for (int s : sites) acc += p.matrix(s, s).real();
        // states per site; clip the last-ulp numerical overshoot
        per_realization.push_back(
            std::clamp(acc / static_cast<double>(sites.size()), 0.0, 1.0));
    }
    ValueWithError r;
    const auto n = per_realization.size();
    for (double v : per_realization) r.value += v;
    r.value /= static_cast<double>(n);
    if (n > 1) {
        double ss = 0.0;
        for (double v : per_realization) ss += (v - r.value) * (v - r.value);
        r.stderr_ = std::sqrt(ss / (static_cast<double>(n) * (n - 1)));
    }
    return r;
}

std::vector<BandInterval> band_bounds(double b, double lambda, double m1,
                                      double m2, int n_max) {
    if (b <= 0.0) throw parameter_error("band_bounds requires B > 0");
    if (lambda < 0.0) throw parameter_error("band_bounds requires lambda >= 0");
    std::vector<BandInterval> out;
    out.reserve(static_cast<std::size_t>(n_max));
    for (int n = 1; n <= n_max; ++n) {
        const double bn = (2.0 * n - 1.0) * b;
        out.push_back({n, bn - lambda * m1, bn + lambda * m2});
    }
    return out;
}

bool gap_open(double b, double lambda, double m1, double m2) {
    if (b <= 0.0) throw parameter_error("gap_open requires B > 0");
    return lambda * (m1 + m2) < 2.0 * b;
}

bool gap_all_closed(double b, double lambda, double m1, double m2,
                    double u_minus) {
    if (b <= 0.0) throw parameter_error("gap_all_closed requires B > 0");
    if (u_minus <= 0.0 || u_minus > 1.0)
        throw parameter_error("gap_all_closed requires 0 < U_- <= 1");
    return lambda * (m1 + m2) * u_minus >= 2.0 * b;
}

namespace {

Eigen::MatrixXcd matrix_sqrt_psd(const Eigen::MatrixXcd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace

BandEdgeResult birman_schwinger_edge(int n, double b, double lambda,
                                     const LLLBasisSpec& spec,
                                     const DisorderModel& disorder,
                                     EdgeSide side) {
    if (lambda <= 0.0)
        throw argument_error("birman_schwinger_edge requires lambda > 0");
    if (n < 1 || (side == EdgeSide::Plus && n >= spec.n_max))
        throw argument_error("birman_schwinger_edge: level n outside the truncated basis");
    spec.validate();

    const double coupling = side == EdgeSide::Plus ? disorder.m2 : disorder.m1;
    if (coupling <= 0.0)
        throw argument_error("birman_schwinger_edge: zero coupling on this side");

    // Constant-sign potential: the profile-summed U with omega = 1.
    std::vector<double> ones(static_cast<std::size_t>(spec.n_cells()), 1.0);
    const Eigen::MatrixXcd v_u = lll_potential_matrix(spec, ones);
    const Eigen::MatrixXcd sqrt_v = matrix_sqrt_psd(v_u);

    Eigen::VectorXd levels(spec.dim());
    for (int m = 0; m < spec.n_max; ++m)
        for (int j = 0; j < spec.n_phi; ++j)
            levels[m * spec.n_phi + j] = (2.0 * m + 1.0) * b;

    const double bn = (2.0 * n - 1.0) * b;
    // r+(E): largest Birman-Schwinger eigenvalue; sign arranged so the
    // crossing condition reads lambda * coupling * r+(E) = 1 on both sides.
    auto r_plus = [&](double e) {
        Eigen::VectorXd res = (levels.array() - e).inverse();
        Eigen::MatrixXcd r = sqrt_v * res.asDiagonal() * sqrt_v;
        if (side == EdgeSide::Plus) r = -r;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
            Eigen::MatrixXcd(0.5 * (r + r.adjoint())));
        return es.eigenvalues().maxCoeff();
    };
    auto crossing = [&](double e) { return lambda * coupling * r_plus(e) - 1.0; };

    BandEdgeResult out;
    double lo, hi;
    const double eps = 1e-11 * std::max(1.0, bn);
    if (side == EdgeSide::Plus) {
        lo = bn + eps;                    // crossing > 0 here
        hi = bn + 2.0 * b - eps;          // gap top B_{n+1}
        if (crossing(hi) >= 0.0) {
            out.energy = bn + 2.0 * b;
            out.saturated = true;
        }
    } else {
        hi = bn - eps;                    // crossing > 0 here
        lo = n == 1 ? bn - lambda * disorder.m1 - 0.5 : bn - 2.0 * b + eps;
        if (n > 1 && crossing(lo) >= 0.0) {
            out.energy = bn - 2.0 * b;
            out.saturated = true;
        }
    }

    if (!out.saturated) {
        // crossing is monotone across the gap; standard bisection.
        for (int it = 0; it < 60 && hi - lo > 1e-8; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double f = crossing(mid);
            const bool root_above = (side == EdgeSide::Plus) ? (f >= 0.0) : (f < 0.0);
            if (root_above)
                lo = mid;
            else
                hi = mid;
        }
        out.energy = 0.5 * (lo + hi);
    }

    // Cross-check against direct diagonalization of the full matrix.
    Eigen::MatrixXcd h = lambda * coupling * (side == EdgeSide::Plus ? 1.0 : -1.0) * v_u;
    h += levels.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    const Eigen::VectorXd& ev = es.eigenvalues();
    if (side == EdgeSide::Plus)
        out.direct = std::min(ev[n * spec.n_phi - 1], bn + 2.0 * b);
    else
        out.direct = n == 1 ? ev[0] : std::max(ev[(n - 1) * spec.n_phi], bn - 2.0 * b);
    return out;
}

} // namespace landau
