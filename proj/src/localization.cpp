#include "landau/localization.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>

namespace landau {

namespace {

std::vector<Eigen::Vector2i> disc_displacements(int max_radius) {
    std::vector<Eigen::Vector2i> out;
    for (int dy = -max_radius; dy <= max_radius; ++dy)
        for (int dx = -max_radius; dx <= max_radius; ++dx)
            if (dx * dx + dy * dy <= max_radius * max_radius)
                out.emplace_back(dx, dy);
    return out;
}

} // namespace

int KernelDecayProfile::max_radius() const {
    double r = 0.0;
    for (const auto& d : displacements) r = std::max(r, d.cast<double>().norm());
    return static_cast<int>(std::floor(r + 1e-9));
}

KernelDecayProfile kernel_decay(std::span<const FermiProjection> projections,
                                const LatticeGeometry& geom,
                                const Eigen::Vector2i& reference, int max_radius,
                                int margin) {
    if (projections.empty())
        throw argument_error("kernel_decay: empty projection ensemble");
    if (max_radius < 1) throw argument_error("kernel_decay: max_radius >= 1");
    const int rx = reference[0], ry = reference[1];
    if (geom.boundary == Boundary::Open) {
        const int room = std::min({rx, ry, geom.lx - 1 - rx, geom.ly - 1 - ry});
        if (room < max_radius + margin)
            throw geometry_error(
                "kernel_decay: reference too close to the boundary");
    }
    auto wrap = [](int v, int m) { return ((v % m) + m) % m; };

    KernelDecayProfile prof;
    prof.reference = reference;
    prof.displacements = disc_displacements(max_radius);
    const std::size_t nd = prof.displacements.size();
    const std::size_t nr = projections.size();
    prof.raw.resize(static_cast<Eigen::Index>(nr), static_cast<Eigen::Index>(nd));

    const int ref_idx = geom.site_index(rx, ry);
    for (std::size_t i = 0; i < nr; ++i) {
        const FermiProjection& p = projections[i];
        if (p.dim() != geom.n_sites())
            throw argument_error("kernel_decay: projection does not match geometry");
        for (std::size_t d = 0; d < nd; ++d) {
            int x = rx + prof.displacements[d][0];
            int y = ry + prof.displacements[d][1];
            if (geom.boundary == Boundary::MagneticPeriodic) {
                x = wrap(x, geom.lx);
                y = wrap(y, geom.ly);
            }
            prof.raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) =
                std::abs(p.matrix(geom.site_index(x, y), ref_idx));
        }
    }

    prof.values.resize(nd);
    prof.stderrs.resize(nd);
    for (std::size_t d = 0; d < nd; ++d) {
        const auto col = prof.raw.col(static_cast<Eigen::Index>(d));
        const double mean = col.mean();
        prof.values[d] = mean;
        prof.stderrs[d] =
            nr > 1 ? std::sqrt((col.array() - mean).square().sum() /
                               (double(nr) * double(nr - 1)))
                   : 0.0;
    }
    return prof;
}

namespace {

// Ensemble norm at displacement d: (mean of value^power)^(1/power) from the
// per-realization data, or the plain profile mean when only means survive.
double ensemble_norm(const KernelDecayProfile& prof, std::size_t d, double power) {
    if (prof.mean_only()) return prof.values[d];
    const auto col = prof.raw.col(static_cast<Eigen::Index>(d));
    return std::pow(col.array().pow(power).mean(), 1.0 / power);
}

LocalizationLengthEstimate weighted_sum(const KernelDecayProfile& prof,
                                        double exponent, bool is_ell_q) {
    LocalizationLengthEstimate est;
    est.exponent = exponent;
    est.from_mean_only = prof.mean_only();
    est.truncation_radius = prof.max_radius();
    // last shell = displacements at the outermost attained distance
    double r_max = 0.0;
    for (const auto& d : prof.displacements)
        r_max = std::max(r_max, d.cast<double>().norm());
    for (std::size_t d = 0; d < prof.displacements.size(); ++d) {
        const double r = prof.displacements[d].cast<double>().norm();
        double term;
        if (is_ell_q)
            term = std::max(r, 1.0) * ensemble_norm(prof, d, exponent);
        else
            term = r * std::pow(ensemble_norm(prof, d, 2.0), exponent);
        est.value += term;
        if (r > r_max - 1e-9) est.tail_sensitivity += term;
    }
    return est;
}

} // namespace

LocalizationLengthEstimate ell_q(const KernelDecayProfile& profile, double q) {
    if (q < 1.0) throw argument_error("ell_q requires q >= 1");
    if (profile.displacements.empty())
        throw argument_error("ell_q: empty profile");
    return weighted_sum(profile, q, true);
}

LocalizationLengthEstimate L_beta(const KernelDecayProfile& profile, double beta) {
    if (beta <= 0.0 || beta > 1.0)
        throw argument_error("L_beta requires beta in (0,1]");
    if (profile.displacements.empty())
        throw argument_error("L_beta: empty profile");
    return weighted_sum(profile, beta, false);
}

namespace {

struct LinFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

LinFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    LinFit f;
    const double den = n * sxx - sx * sx;
    if (std::abs(den) < 1e-14) throw fit_error("degenerate abscissae in fit");
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double ymean = sy / n;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double pred = f.intercept + f.slope * xs[i];
        ss_res += (ys[i] - pred) * (ys[i] - pred);
        ss_tot += (ys[i] - ymean) * (ys[i] - ymean);
    }
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

} // namespace

DecayFit decay_rate_fit(const KernelDecayProfile& profile) {
    // The fit targets the decay envelope: per distinct radius take the
    // largest value (slowest direction on an anisotropic lattice), discard
    // values at the numerical-noise floor, then keep the monotone skyline --
    // points not exceeded at any larger radius. Directional minima and exact
    // lattice zeros sit below the envelope and carry no rate information.
    double v_max = 0.0;
    for (double v : profile.values) v_max = std::max(v_max, v);
    const double floor = 1e-12 * v_max;

    std::map<long, double> by_radius; // lround(r * 1e6) -> max value
    for (std::size_t d = 0; d < profile.displacements.size(); ++d) {
        const double r = profile.displacements[d].cast<double>().norm();
        if (r < 0.5 || profile.values[d] <= floor) continue;
        auto [it, inserted] = by_radius.emplace(std::lround(r * 1e6),
                                                profile.values[d]);
        if (!inserted) it->second = std::max(it->second, profile.values[d]);
    }

    std::vector<double> rs, logs;
    double tail_max = 0.0;
    for (auto it = by_radius.rbegin(); it != by_radius.rend(); ++it) {
        if (it->second < tail_max) continue;
        tail_max = it->second;
        rs.push_back(static_cast<double>(it->first) * 1e-6);
        logs.push_back(std::log(it->second));
    }
    std::reverse(rs.begin(), rs.end());
    std::reverse(logs.begin(), logs.end());
    if (rs.size() < 5)
        throw fit_error("decay_rate_fit needs >= 5 distinct radii with positive values");

    std::vector<double> log_rs(rs.size());
    std::transform(rs.begin(), rs.end(), log_rs.begin(),
                   [](double r) { return std::log(r); });
    const LinFit expo = least_squares(rs, logs);
    const LinFit power = least_squares(log_rs, logs);

    DecayFit fit;
    if (expo.r2 >= power.r2) {
        fit.model = DecayFit::Model::Exponential;
        fit.rate = -expo.slope;
        fit.r_squared = expo.r2;
    } else {
        fit.model = DecayFit::Model::Power;
        fit.rate = -power.slope;
        fit.r_squared = power.r2;
    }
    return fit;
}

double energy_bump(double e, double lo, double hi) {
    const double cen = 0.5 * (lo + hi);
    const double w = 0.5 * (hi - lo);
    const double d = std::abs(e - cen);
    if (d <= w) return 1.0;
    if (d >= 1.2 * w) return 0.0;
    const double s = (1.2 * w - d) / (0.2 * w); // in (0,1)
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s)); // C^2 smoothstep
}

TransportMoment transport_moment(const SpectralData& s,
                                 const LatticeGeometry& geom, double p,
                                 std::pair<double, double> energy_window,
                                 const std::vector<double>& times) {
    if (geom.boundary != Boundary::Open)
        throw geometry_error("transport_moment needs open boundaries");
    if (p < 0.0) throw argument_error("transport_moment requires p >= 0");
    if (energy_window.second <= energy_window.first)
        throw argument_error("transport_moment: empty energy window");
    const int dim = static_cast<int>(s.eigenvalues.size());
    if (dim != geom.n_sites())
        throw argument_error("spectral data does not match geometry");

    TransportMoment m;
    m.p = p;

    const int cx = geom.lx / 2, cy = geom.ly / 2;
    const int center = geom.site_index(cx, cy);

    Eigen::VectorXcd coeff = s.eigenvectors.row(center).adjoint();
    bool any = false;
    for (int i = 0; i < dim; ++i) {
        const double x = energy_bump(s.eigenvalues[i], energy_window.first,
                                     energy_window.second);
        coeff[i] *= x;
        if (x != 0.0) any = true;
    }
    if (!any) {
        m.window_empty = true;
        m.times = times;
        m.values.assign(times.size(), 0.0);
        return m;
    }

    Eigen::VectorXd weight(dim);    // <x>^p from the center
    std::vector<char> on_boundary(static_cast<std::size_t>(dim), 0);
    for (int y = 0; y < geom.ly; ++y)
        for (int x = 0; x < geom.lx; ++x) {
            const int idx = geom.site_index(x, y);
            const double dx = x - cx, dy = y - cy;
            weight[idx] = std::pow(1.0 + dx * dx + dy * dy, 0.5 * p);
            if (x == 0 || y == 0 || x == geom.lx - 1 || y == geom.ly - 1)
                on_boundary[static_cast<std::size_t>(idx)] = 1;
        }

    const double norm2 = coeff.squaredNorm();
    const std::complex<double> I(0.0, 1.0);
    for (double t : times) {
        Eigen::VectorXcd phased = coeff;
        for (int i = 0; i < dim; ++i)
            phased[i] *= std::exp(-I * s.eigenvalues[i] * t);
        Eigen::VectorXcd amp = s.eigenvectors * phased;
        double value = 0.0, boundary2 = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double a2 = std::norm(amp[i]);
            value += weight[i] * a2;
            if (on_boundary[static_cast<std::size_t>(i)]) boundary2 += a2;
        }
        // boundary weight above 1% marks finite-size reflections; values
        // are still reported, the flag warns that late times are biased
        if (norm2 > 0 && boundary2 / norm2 > 0.01) m.truncated = true;
        m.times.push_back(t);
        m.values.push_back(value);
    }
    return m;
}

double time_averaged_moment(TransportMoment& m, const std::vector<double>& t_list) {
    if (m.times.size() < 2)
        throw resolution_error("time_averaged_moment needs >= 2 sampled times");
    double max_gap = m.times.front();
    for (std::size_t i = 1; i < m.times.size(); ++i)
        max_gap = std::max(max_gap, m.times[i] - m.times[i - 1]);

    auto integrate = [&](double t_avg, std::size_t stride) {
        // exact integral of the piecewise-linear interpolant against
        // e^(-t/T)/T, constant head before the first sample and constant
        // tail after the last
        double acc = m.values.front() * (1.0 - std::exp(-m.times.front() / t_avg));
        std::size_t prev = 0;
        for (std::size_t i = stride; i < m.times.size(); prev = i, i += stride) {
            const double t0 = m.times[prev], t1 = m.times[i];
            const double v0 = m.values[prev], v1 = m.values[i];
            const double slope = (v1 - v0) / (t1 - t0);
            auto anti = [&](double t, double v) {
                return -(v + slope * t_avg) * std::exp(-t / t_avg);
            };
            acc += anti(t1, v1) - anti(t0, v0);
        }
        acc += m.values[prev] * std::exp(-m.times[prev] / t_avg);
        return acc;
    };

    double max_err = 0.0;
    m.time_averaged.clear();
    for (double t_avg : t_list) {
        if (t_avg <= 0.0)
            throw argument_error("time_averaged_moment requires T > 0");
        if (max_gap > 0.5 * t_avg)
            throw resolution_error(
                "sampled times too sparse for the requested averaging time");
        const double fine = integrate(t_avg, 1);
        const double coarse = integrate(t_avg, 2);
        m.time_averaged.emplace_back(t_avg, fine);
        max_err = std::max(max_err, std::abs(fine - coarse));
    }
    return max_err;
}

DivergenceScanResult divergence_scan(const DivergenceScanSpec& spec) {
    if (spec.energies.empty()) throw argument_error("divergence_scan: empty E-grid");
    if (spec.sizes.empty()) throw argument_error("divergence_scan: no sizes");
    if (spec.n_realizations < 1)
        throw argument_error("divergence_scan: n_realizations >= 1");

    DivergenceScanResult out;
    out.growth_defined = spec.sizes.size() >= 2;

    const std::size_t ne = spec.energies.size();
    std::map<int, std::vector<double>> ell2_by_size;

    for (int L : spec.sizes) {
        LatticeGeometry geom{L, L, Boundary::Open};
        const int cx = L / 2, cy = L / 2;
        const int radius = std::min(spec.max_radius,
                                    std::min({cx, cy, L - 1 - cx, L - 1 - cy}));
        const auto disp = disc_displacements(radius);
        const int ref = geom.site_index(cx, cy);

        // accumulate mean |P_{x,0}|^2 per (E, displacement)
        std::vector<Eigen::VectorXd> sq(ne, Eigen::VectorXd::Zero(
                                               static_cast<Eigen::Index>(disp.size())));
        for (int i = 0; i < spec.n_realizations; ++i) {
            const auto real = sample_disorder(spec.disorder, geom.n_sites(),
                                              spec.base_seed ^ static_cast<std::uint64_t>(i));
            const auto h = build_hofstadter(geom, spec.flux, spec.disorder, real);
            const SpectralData sd = eigendecompose(h);
            for (std::size_t e = 0; e < ne; ++e) {
                Eigen::Index k = 0;
                while (k < sd.eigenvalues.size() &&
                       sd.eigenvalues[k] <= spec.energies[e])
                    ++k;
                if (k == 0) continue;
                // column of the Fermi projection at the reference site
                Eigen::VectorXcd col =
                    sd.eigenvectors.leftCols(k) *
                    sd.eigenvectors.row(ref).head(k).adjoint();
                for (std::size_t d = 0; d < disp.size(); ++d) {
                    const int x = cx + disp[d][0], y = cy + disp[d][1];
                    sq[e][static_cast<Eigen::Index>(d)] +=
                        std::norm(col[geom.site_index(x, y)]);
                }
            }
        }

        std::vector<double> ell2(ne, 0.0);
        for (std::size_t e = 0; e < ne; ++e)
            for (std::size_t d = 0; d < disp.size(); ++d) {
                const double r = disp[d].cast<double>().norm();
                ell2[e] += std::max(r, 1.0) *
                           std::sqrt(sq[e][static_cast<Eigen::Index>(d)] /
                                     spec.n_realizations);
            }
        ell2_by_size[L] = ell2;
        for (std::size_t e = 0; e < ne; ++e)
            out.rows.push_back({spec.energies[e], L, ell2[e]});
    }

    const int l_max = *std::max_element(spec.sizes.begin(), spec.sizes.end());
    const int l_min = *std::min_element(spec.sizes.begin(), spec.sizes.end());
    const auto& top = ell2_by_size[l_max];
    std::size_t best = 0;
    for (std::size_t e = 1; e < ne; ++e)
        if (top[e] > top[best]) best = e;
    out.e_star = spec.energies[best];
    if (out.growth_defined && ell2_by_size[l_min][best] > 0.0)
        out.growth_factor = top[best] / ell2_by_size[l_min][best];
    return out;
}

} // namespace landau
