#include "landau/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>

namespace landau {

double pairwise_sum(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) return 0.0;
    if (n == 1) return values[0];
    if (n == 2) return values[0] + values[1];
    const std::size_t half = n / 2;
    return pairwise_sum(values.subspan(0, half)) + pairwise_sum(values.subspan(half));
}

const std::vector<std::string>& EnsembleSpec::registered_observables() {
    static const std::vector<std::string> names = {
        "hall", "ids", "kernel", "ell_q", "L_beta", "moments", "edges"};
    return names;
}

void EnsembleSpec::validate() const {
    if (n_realizations < 1)
        throw argument_error("ensemble: n_realizations must be >= 1");
    if (energies.empty())
        throw argument_error("ensemble: the energy grid must be nonempty");
    if (observables.empty())
        throw argument_error("ensemble: no observables requested");
    const auto& reg = registered_observables();
    for (const std::string& o : observables) {
        if (std::find(reg.begin(), reg.end(), o) == reg.end())
            throw argument_error("ensemble: unknown observable '" + o + "'");
        if (o == "edges" && model.type != ModelConfig::Type::LLL)
            throw argument_error("ensemble: 'edges' needs the LLL model");
    }
    if (kernel_radius < 1)
        throw argument_error("ensemble: kernel_radius must be >= 1");
    if (q < 1.0) throw argument_error("ensemble: q must be >= 1");
    if (beta <= 0.0 || beta > 1.0)
        throw argument_error("ensemble: beta must lie in (0,1]");
    if (moment_p < 0.0 || moment_window <= 0.0 || moment_dt <= 0.0 ||
        moment_t_max < 2.0 * moment_dt || moment_t_avg <= 0.0)
        throw argument_error("ensemble: invalid transport-moment parameters");
    if (model.type == ModelConfig::Type::LLL && fluxes.size() > 1)
        throw argument_error("ensemble: flux grid does not apply to the LLL model");
    model.disorder.validate();
}

namespace {

bool wants(const EnsembleSpec& spec, const std::string& name) {
    return std::find(spec.observables.begin(), spec.observables.end(), name) !=
           spec.observables.end();
}

struct GridGroup {
    double lambda = 0.0;
    int size = 0;
    FluxRational flux;
    ModelConfig model; // base model with the group overrides applied
};

ModelConfig apply_overrides(const ModelConfig& base, double lambda, int size,
                            const FluxRational& flux) {
    ModelConfig m = base;
    m.disorder.lambda = lambda;
    m.flux = flux;
    if (m.type == ModelConfig::Type::Hofstadter) {
        m.geom.lx = size;
        m.geom.ly = size;
    } else {
        m.lll.n_phi = size;
    }
    return m;
}

// Everything one realization contributes at one grid group: scalar
// observables and the raw kernel row, per energy.
struct RealizationSlot {
    bool failed = false;
    std::string message;
    std::vector<std::map<std::string, double>> scalars;   // per energy
    std::vector<Eigen::RowVectorXd> kernel_rows;          // per energy
};

void evaluate_realization(const EnsembleSpec& spec, const GridGroup& group,
                          std::uint64_t seed, RealizationSlot& slot) {
    const ModelConfig& m = group.model;
    const int dim = m.type == ModelConfig::Type::Hofstadter
                        ? m.geom.n_sites()
                        : m.lll.dim();
    if (dim > spec.dim_cap)
        throw resource_error("ensemble: model dimension exceeds the cap");

    const DisorderRealization real =
        sample_disorder(m.disorder, m.n_disorder_sites(), seed);
    const HermitianOperator h = m.build(real);
    const SpectralData s = eigendecompose(h);

    const bool is_lattice = m.type == ModelConfig::Type::Hofstadter;
    const bool need_projection = wants(spec, "hall") || wants(spec, "ids") ||
                                 wants(spec, "kernel") || wants(spec, "ell_q") ||
                                 wants(spec, "L_beta");
    if (need_projection && !is_lattice)
        throw argument_error(
            "ensemble: projection-based observables need the lattice model");

    TraceWindow window;
    int kernel_r = 0;
    if (is_lattice) {
        window = TraceWindow::centered(m.geom);
        const int room = std::min({window.cx, window.cy, m.geom.lx - 1 - window.cx,
                                   m.geom.ly - 1 - window.cy});
        kernel_r = std::min(spec.kernel_radius, room);
    }

    slot.scalars.resize(spec.energies.size());
    slot.kernel_rows.resize(spec.energies.size());

    std::vector<double> times;
    if (wants(spec, "moments"))
        for (double t = 0.0; t <= spec.moment_t_max + 1e-12; t += spec.moment_dt)
            times.push_back(t);

    for (std::size_t e = 0; e < spec.energies.size(); ++e) {
        const double energy = spec.energies[e];
        auto& out = slot.scalars[e];

        if (need_projection) {
            const FermiProjection p = fermi_projection(s, energy);
            if (wants(spec, "ids")) {
                double acc = 0.0;
                const auto sites = window.site_indices(m.geom);
                for (int site : sites) acc += p.matrix(site, site).real();
                out["ids"] = std::clamp(
                    acc / static_cast<double>(sites.size()), 0.0, 1.0);
            }
            if (wants(spec, "hall")) {
                const HallResult hall =
                    m.geom.boundary == Boundary::Open
                        ? hall_kubo_streda(p, m.geom, window)
                        : index_pair(p, m.geom,
                                     GaugeFluxCenter::make(window.cx + 0.5,
                                                           window.cy + 0.5));
                out["hall"] = hall.value;
                out["hall_integrality"] = hall.integrality_residual;
            }
            if (wants(spec, "kernel") || wants(spec, "ell_q") ||
                wants(spec, "L_beta")) {
                const FermiProjection single[] = {p};
                const KernelDecayProfile prof = kernel_decay(
                    std::span<const FermiProjection>(single, 1), m.geom,
                    Eigen::Vector2i(window.cx, window.cy), kernel_r);
                slot.kernel_rows[e] = prof.raw.row(0);
            }
        }

        if (wants(spec, "moments")) {
            if (!is_lattice)
                throw argument_error("ensemble: 'moments' needs the lattice model");
            TransportMoment mom = transport_moment(
                s, m.geom, spec.moment_p,
                {energy - spec.moment_window, energy + spec.moment_window}, times);
            if (mom.window_empty) {
                out["moment_avg"] = 0.0;
            } else {
                time_averaged_moment(mom, {spec.moment_t_avg});
                out["moment_avg"] = mom.time_averaged.front().second;
            }
        }
    }
}

ObservableStats aggregate(const std::vector<double>& values_in_index_order) {
    ObservableStats st;
    st.count = static_cast<int>(values_in_index_order.size());
    if (st.count == 0) return st;
    st.mean = pairwise_sum(values_in_index_order) / st.count;
    st.min = *std::min_element(values_in_index_order.begin(),
                               values_in_index_order.end());
    st.max = *std::max_element(values_in_index_order.begin(),
                               values_in_index_order.end());
    if (st.count > 1) {
        std::vector<double> sq(values_in_index_order.size());
        for (std::size_t i = 0; i < sq.size(); ++i) {
            const double d = values_in_index_order[i] - st.mean;
            sq[i] = d * d;
        }
        st.stderr_ = std::sqrt(pairwise_sum(sq) /
                               (double(st.count) * double(st.count - 1)));
    }
    return st;
}

} // namespace

bool EnsembleStats::any_failure() const {
    for (const auto& p : points)
        if (!p.failures.empty()) return true;
    return false;
}

EnsembleStats run_ensemble(const EnsembleSpec& spec_in, int workers) {
    EnsembleSpec spec = spec_in;
    if (spec.lambdas.empty()) spec.lambdas = {spec.model.disorder.lambda};
    if (spec.sizes.empty())
        spec.sizes = {spec.model.type == ModelConfig::Type::Hofstadter
                          ? spec.model.geom.lx
                          : spec.model.lll.n_phi};
    if (spec.fluxes.empty()) spec.fluxes = {spec.model.flux};
    spec.validate();
    if (workers < 1)
        workers = std::max(1u, std::thread::hardware_concurrency());

    EnsembleStats stats;
    for (int i = 0; i < spec.n_realizations; ++i)
        stats.seeds.push_back(spec.base_seed ^ static_cast<std::uint64_t>(i));

    std::vector<GridGroup> groups;
    for (const FluxRational& flux : spec.fluxes)
        for (int size : spec.sizes)
            for (double lambda : spec.lambdas)
                groups.push_back({lambda, size, flux,
                                  apply_overrides(spec.model, lambda, size, flux)});

    for (const GridGroup& group : groups) {
        std::vector<RealizationSlot> slots(
            static_cast<std::size_t>(spec.n_realizations));

        std::atomic<int> next{0};
        auto worker = [&] {
            for (;;) {
                const int r = next.fetch_add(1);
                if (r >= spec.n_realizations) return;
                RealizationSlot& slot = slots[static_cast<std::size_t>(r)];
                try {
                    evaluate_realization(spec, group, stats.seeds[r], slot);
                } catch (const std::exception& ex) {
                    slot.failed = true;
                    slot.message = ex.what();
                }
            }
        };
        std::vector<std::thread> pool;
        const int nthreads = std::min(workers, spec.n_realizations);
        for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
        worker();
        for (std::thread& t : pool) t.join();

        // Deterministic edges (constant-sign potential): once per group.
        std::map<std::string, double> edge_values;
        std::string edge_failure;
        if (wants(spec, "edges")) {
            try {
                const auto plus = birman_schwinger_edge(
                    1, group.model.lll.b, group.lambda, group.model.lll,
                    group.model.disorder, EdgeSide::Plus);
                const auto minus = birman_schwinger_edge(
                    1, group.model.lll.b, group.lambda, group.model.lll,
                    group.model.disorder, EdgeSide::Minus);
                edge_values["edge_plus"] = plus.energy;
                edge_values["edge_minus"] = minus.energy;
            } catch (const std::exception& ex) {
                edge_failure = ex.what();
            }
        }

        for (std::size_t e = 0; e < spec.energies.size(); ++e) {
            EnsemblePointResult point;
            point.point = {spec.energies[e], group.lambda, group.size, group.flux};

            std::set<std::string> names;
            for (const RealizationSlot& slot : slots) {
                if (slot.failed) continue;
                for (const auto& [k, v] : slot.scalars[e]) names.insert(k);
            }
            for (const std::string& name : names) {
                std::vector<double> vals;
                for (const RealizationSlot& slot : slots)
                    if (!slot.failed) vals.push_back(slot.scalars[e].at(name));
                point.observables[name] = aggregate(vals);
            }
            for (const RealizationSlot& slot : slots)
                if (slot.failed) point.failures.push_back(slot.message);
            if (!edge_failure.empty()) point.failures.push_back(edge_failure);
            for (const auto& [k, v] : edge_values) {
                ObservableStats st;
                st.mean = st.min = st.max = v;
                st.count = 1;
                point.observables[k] = st;
            }

            // Pool the kernel rows into one ensemble profile so that the
            // q-norm averages sit inside the q-th power.
            std::size_t ok = 0;
            for (const RealizationSlot& slot : slots)
                if (!slot.failed && slot.kernel_rows[e].size() > 0) ++ok;
            if (ok > 0) {
                const ModelConfig& m = group.model;
                TraceWindow window = TraceWindow::centered(m.geom);
                const int room =
                    std::min({window.cx, window.cy, m.geom.lx - 1 - window.cx,
                              m.geom.ly - 1 - window.cy});
                const int kernel_r = std::min(spec.kernel_radius, room);

                KernelDecayProfile prof;
                prof.reference = {window.cx, window.cy};
                for (int dy = -kernel_r; dy <= kernel_r; ++dy)
                    for (int dx = -kernel_r; dx <= kernel_r; ++dx)
                        if (dx * dx + dy * dy <= kernel_r * kernel_r)
                            prof.displacements.emplace_back(dx, dy);
                prof.raw.resize(static_cast<Eigen::Index>(ok),
                                static_cast<Eigen::Index>(prof.displacements.size()));
                Eigen::Index row = 0;
                for (const RealizationSlot& slot : slots)
                    if (!slot.failed && slot.kernel_rows[e].size() > 0)
                        prof.raw.row(row++) = slot.kernel_rows[e];
                prof.values.resize(prof.displacements.size());
                prof.stderrs.resize(prof.displacements.size());
                for (std::size_t d = 0; d < prof.displacements.size(); ++d) {
                    const auto col = prof.raw.col(static_cast<Eigen::Index>(d));
                    prof.values[d] = col.mean();
                    prof.stderrs[d] =
                        ok > 1 ? std::sqrt((col.array() - prof.values[d])
                                               .square()
                                               .sum() /
                                           (double(ok) * double(ok - 1)))
                               : 0.0;
                }
                if (wants(spec, "kernel")) point.kernel = prof;
                auto as_stats = [&](const LocalizationLengthEstimate& est) {
                    ObservableStats st;
                    st.mean = st.min = st.max = est.value;
                    st.count = static_cast<int>(ok);
                    return st;
                };
                if (wants(spec, "ell_q"))
                    point.observables["ell_q"] = as_stats(ell_q(prof, spec.q));
                if (wants(spec, "L_beta"))
                    point.observables["L_beta"] = as_stats(L_beta(prof, spec.beta));
            }

            stats.points.push_back(std::move(point));
        }
    }
    return stats;
}

ContinuityScan continuity_scan(const EnsembleStats& stats) {
    const std::size_t n = stats.points.size();
    if (n < 8)
        throw argument_error("continuity_scan needs >= 8 grid points");
    for (const auto& p : stats.points) {
        if (p.point.lambda != stats.points[0].point.lambda ||
            p.point.size != stats.points[0].point.size ||
            p.point.flux.p != stats.points[0].point.flux.p ||
            p.point.flux.q != stats.points[0].point.flux.q)
            throw argument_error("continuity_scan: points differ beyond energy");
        if (!p.observables.count("ids"))
            throw argument_error("continuity_scan: 'ids' was not measured");
    }
    const double h0 = stats.points[1].point.energy - stats.points[0].point.energy;
    if (h0 <= 0.0) throw argument_error("continuity_scan: energies not increasing");
    for (std::size_t i = 1; i < n; ++i) {
        const double h = stats.points[i].point.energy -
                         stats.points[i - 1].point.energy;
        if (std::abs(h - h0) > 1e-9 * std::max(1.0, std::abs(h0)))
            throw argument_error("continuity_scan: non-uniform energy grid");
    }

    std::vector<double> ids(n), sigma;
    for (std::size_t i = 0; i < n; ++i)
        ids[i] = stats.points[i].observables.at("ids").mean;
    if (stats.points[0].observables.count("hall"))
        for (std::size_t i = 0; i < n; ++i)
            sigma.push_back(stats.points[i].observables.at("hall").mean);

    ContinuityScan scan;
    for (std::size_t k = 1; k < n; ++k) {
        double sup = 0.0;
        for (std::size_t i = 0; i + k < n; ++i)
            sup = std::max(sup, std::abs(ids[i + k] - ids[i]));
        scan.pairs.emplace_back(k * h0, sup);
    }
    for (std::size_t i = 0; i < sigma.size(); ++i)
        for (std::size_t j = i + 1; j < sigma.size(); ++j)
            scan.max_delta_sigma =
                std::max(scan.max_delta_sigma, std::abs(sigma[j] - sigma[i]));

    std::vector<double> lx, ly;
    for (const auto& [h, sup] : scan.pairs)
        if (sup > 0.0) {
            lx.push_back(std::log(h));
            ly.push_back(std::log(sup));
        }
    if (lx.size() < 2) {
        scan.degenerate = true;
        return scan;
    }
    const double nn = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double den = nn * sxx - sx * sx;
    if (std::abs(den) < 1e-14) {
        scan.degenerate = true;
        return scan;
    }
    scan.delta = (nn * sxy - sx * sy) / den;
    scan.c = std::exp((sy - scan.delta * sx) / nn);
    double ss_res = 0, ss_tot = 0;
    const double ymean = sy / nn;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double pred = std::log(scan.c) + scan.delta * lx[i];
        ss_res += (ly[i] - pred) * (ly[i] - pred);
        ss_tot += (ly[i] - ymean) * (ly[i] - ymean);
    }
    scan.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return scan;
}

} // namespace landau
