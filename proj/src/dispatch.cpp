#include "landau/config.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#ifndef LANDAULAB_GIT_HASH
#define LANDAULAB_GIT_HASH "unknown"
#endif

namespace landau {

namespace {

struct OutputSink {
    std::filesystem::path dir;
    json files = json::object();
    std::vector<std::string> warnings;

    void write(const std::string& name, const std::string& contents) {
        std::filesystem::create_directories(dir);
        const std::filesystem::path path = dir / name;
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw resource_error("cannot write output file: " + path.string());
        out << contents;
        out.close();
        std::ostringstream digest;
        digest << std::hex << std::setw(16) << std::setfill('0')
               << fnv1a64(contents);
        files[name] = {{"bytes", contents.size()}, {"fnv1a64", digest.str()}};
    }
};

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string point_prefix(const GridPoint& p) {
    std::ostringstream os;
    os << fmt(p.energy) << ',' << fmt(p.lambda) << ',' << p.size << ','
       << p.flux.p << ',' << p.flux.q;
    return os.str();
}

/// Wide CSV: one row per grid point, stats columns per observable.
std::string stats_csv(const EnsembleStats& stats) {
    std::vector<std::string> names;
    for (const auto& p : stats.points)
        for (const auto& [k, _] : p.observables)
            if (std::find(names.begin(), names.end(), k) == names.end())
                names.push_back(k);
    std::sort(names.begin(), names.end());

    std::ostringstream os;
    os << "energy,lambda,size,flux_p,flux_q,n_failures";
    for (const std::string& n : names)
        os << ',' << n << "_mean," << n << "_stderr," << n << "_min," << n
           << "_max," << n << "_count";
    os << '\n';
    for (const auto& p : stats.points) {
        os << point_prefix(p.point) << ',' << p.failures.size();
        for (const std::string& n : names) {
            const auto it = p.observables.find(n);
            if (it == p.observables.end()) {
                os << ",,,,,0";
            } else {
                const ObservableStats& st = it->second;
                os << ',' << fmt(st.mean) << ',' << fmt(st.stderr_) << ','
                   << fmt(st.min) << ',' << fmt(st.max) << ',' << st.count;
            }
        }
        os << '\n';
    }
    return os.str();
}

/// Long-format CSV: one row per (grid point, observable), plot-ready.
std::string long_csv(const EnsembleStats& stats) {
    std::ostringstream os;
    os << "energy,lambda,size,flux_p,flux_q,observable,mean,stderr,min,max,count\n";
    for (const auto& p : stats.points)
        for (const auto& [name, st] : p.observables)
            os << point_prefix(p.point) << ',' << name << ',' << fmt(st.mean)
               << ',' << fmt(st.stderr_) << ',' << fmt(st.min) << ','
               << fmt(st.max) << ',' << st.count << '\n';
    return os.str();
}

std::string kernel_csv(const EnsembleStats& stats) {
    std::ostringstream os;
    os << "energy,lambda,size,flux_p,flux_q,dx,dy,radius,mean,stderr\n";
    for (const auto& p : stats.points) {
        if (!p.kernel) continue;
        const KernelDecayProfile& k = *p.kernel;
        for (std::size_t d = 0; d < k.displacements.size(); ++d)
            os << point_prefix(p.point) << ',' << k.displacements[d][0] << ','
               << k.displacements[d][1] << ','
               << fmt(k.displacements[d].cast<double>().norm()) << ','
               << fmt(k.values[d]) << ',' << fmt(k.stderrs[d]) << '\n';
    }
    return os.str();
}

int finalize(const RunConfig& cfg, OutputSink& sink, int status,
             double wall_seconds, const EnsembleStats* stats) {
    json manifest = {
        {"experiment", experiment_name(cfg.experiment)},
        {"config", cfg.normalized},
        {"config_digest",
         [&] {
             std::ostringstream os;
             os << std::hex << std::setw(16) << std::setfill('0')
                << fnv1a64(cfg.normalized.dump());
             return os.str();
         }()},
        {"code_version", LANDAULAB_GIT_HASH},
        {"wall_seconds", wall_seconds},
        {"defaulted_parameters", cfg.defaulted},
        {"warnings", sink.warnings},
        {"exit_status", status},
    };
    if (stats) manifest["seeds"] = stats->seeds;
    sink.write("manifest.json", manifest.dump(2) + "\n");

    // rewrite with the file table included (manifest lists itself by name only)
    manifest["files"] = sink.files;
    sink.write("manifest.json", manifest.dump(2) + "\n");
    return status;
}

int run_ensemble_experiment(const RunConfig& cfg, OutputSink& sink, int workers,
                            EnsembleStats& stats) {
    EnsembleSpec spec = cfg.ensemble;
    auto ensure = [&](const char* name) {
        if (std::find(spec.observables.begin(), spec.observables.end(), name) ==
            spec.observables.end())
            spec.observables.push_back(name);
    };
    switch (cfg.experiment) {
        case Experiment::Hall:
            ensure("hall");
            ensure("ids");
            break;
        case Experiment::Localization:
            ensure("kernel");
            ensure("ell_q");
            ensure("L_beta");
            break;
        case Experiment::Transport:
            ensure("moments");
            break;
        default:
            break;
    }

    stats = run_ensemble(spec, workers);
    sink.write("results.csv", stats_csv(stats));
    sink.write("results_long.csv", long_csv(stats));
    if (cfg.experiment == Experiment::Localization)
        sink.write("kernel.csv", kernel_csv(stats));

    if (cfg.experiment == Experiment::Sweep && spec.energies.size() >= 8) {
        try {
            const ContinuityScan scan = continuity_scan(stats);
            std::ostringstream os;
            os << "h,sup_delta_n\n";
            for (const auto& [h, sup] : scan.pairs)
                os << fmt(h) << ',' << fmt(sup) << '\n';
            sink.write("continuity.csv", os.str());
            json rec = {{"c", scan.c},
                        {"delta", scan.delta},
                        {"r_squared", scan.r_squared},
                        {"degenerate", scan.degenerate},
                        {"max_delta_sigma", scan.max_delta_sigma}};
            sink.write("continuity.json", rec.dump(2) + "\n");
        } catch (const std::exception& ex) {
            sink.warnings.push_back(std::string("continuity scan skipped: ") +
                                    ex.what());
        }
    }

    for (const auto& p : stats.points)
        for (const std::string& f : p.failures)
            sink.warnings.push_back("realization failure at E=" +
                                    fmt(p.point.energy) + ": " + f);
    return stats.any_failure() ? 2 : 0;
}

int run_spectrum(const RunConfig& cfg, OutputSink& sink, EnsembleStats& stats) {
    const EnsembleSpec& spec = cfg.ensemble;
    for (int i = 0; i < spec.n_realizations; ++i)
        stats.seeds.push_back(spec.base_seed ^ static_cast<std::uint64_t>(i));
    std::ostringstream os;
    os << "realization,seed,index,energy\n";
    for (int i = 0; i < spec.n_realizations; ++i) {
        const auto real = sample_disorder(
            spec.model.disorder, spec.model.n_disorder_sites(), stats.seeds[i]);
        const SpectralData s = eigendecompose(spec.model.build(real));
        for (Eigen::Index k = 0; k < s.eigenvalues.size(); ++k)
            os << i << ',' << stats.seeds[i] << ',' << k << ','
               << fmt(s.eigenvalues[k]) << '\n';
    }
    sink.write("spectrum.csv", os.str());
    return 0;
}

int run_connes(const RunConfig& cfg, OutputSink& sink) {
    const ConnesResult r = connes_sum(cfg.connes_u, cfg.connes_v, cfg.connes_r);
    const double det = double(cfg.connes_u[0]) * cfg.connes_v[1] -
                       double(cfg.connes_u[1]) * cfg.connes_v[0];
    const std::complex<double> target(0.0, -2.0 * std::numbers::pi * det);
    std::ostringstream os;
    os << "u1,u2,v1,v2,r,value_re,value_im,target_re,target_im,abs_error,tail_"
          "estimate\n";
    os << cfg.connes_u[0] << ',' << cfg.connes_u[1] << ',' << cfg.connes_v[0]
       << ',' << cfg.connes_v[1] << ',' << fmt(cfg.connes_r) << ','
       << fmt(r.value.real()) << ',' << fmt(r.value.imag()) << ','
       << fmt(target.real()) << ',' << fmt(target.imag()) << ','
       << fmt(std::abs(r.value - target)) << ',' << fmt(r.tail_estimate) << '\n';
    sink.write("connes.csv", os.str());
    return 0;
}

int run_band_edges(const RunConfig& cfg, OutputSink& sink) {
    const ModelConfig& m = cfg.ensemble.model;
    if (m.type != ModelConfig::Type::LLL)
        throw argument_error("band-edges requires the LLL model");
    std::ostringstream os;
    os << "n,lambda,e_plus,e_plus_direct,e_plus_saturated,e_minus,e_minus_"
          "direct,e_minus_saturated\n";
    for (double lambda : cfg.edge_lambdas) {
        const auto plus = birman_schwinger_edge(cfg.edge_level, m.lll.b, lambda,
                                                m.lll, m.disorder, EdgeSide::Plus);
        const auto minus = birman_schwinger_edge(
            cfg.edge_level, m.lll.b, lambda, m.lll, m.disorder, EdgeSide::Minus);
        os << cfg.edge_level << ',' << fmt(lambda) << ',' << fmt(plus.energy)
           << ',' << fmt(plus.direct) << ',' << (plus.saturated ? 1 : 0) << ','
           << fmt(minus.energy) << ',' << fmt(minus.direct) << ','
           << (minus.saturated ? 1 : 0) << '\n';
    }
    sink.write("band_edges.csv", os.str());
    return 0;
}

} // namespace

int dispatch(const RunConfig& cfg, int workers, bool dry_run) {
    if (dry_run) {
        std::cout << "experiment: " << experiment_name(cfg.experiment) << "\n"
                  << "output directory: " << cfg.out_dir.string() << "\n"
                  << "config (defaults filled):\n"
                  << cfg.normalized.dump(2) << "\n";
        if (!cfg.defaulted.empty()) {
            std::cout << "defaulted parameters:\n";
            for (const std::string& d : cfg.defaulted)
                std::cout << "  " << d << "\n";
        }
        return 0;
    }

    OutputSink sink;
    sink.dir = cfg.out_dir;
    const auto start = std::chrono::steady_clock::now();
    int status = 0;
    EnsembleStats stats;
    const EnsembleStats* stats_ptr = nullptr;
    try {
        switch (cfg.experiment) {
            case Experiment::Spectrum:
                status = run_spectrum(cfg, sink, stats);
                stats_ptr = &stats;
                break;
            case Experiment::ConnesCheck:
                status = run_connes(cfg, sink);
                break;
            case Experiment::BandEdges:
                status = run_band_edges(cfg, sink);
                break;
            case Experiment::Hall:
            case Experiment::Localization:
            case Experiment::Transport:
            case Experiment::Sweep:
                status = run_ensemble_experiment(cfg, sink, workers, stats);
                stats_ptr = &stats;
                break;
        }
    } catch (const std::exception& ex) {
        std::cerr << "fatal: " << ex.what() << "\n";
        sink.warnings.push_back(std::string("fatal: ") + ex.what());
        status = 1;
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    try {
        finalize(cfg, sink, status, wall, stats_ptr);
    } catch (const std::exception& ex) {
        std::cerr << "fatal: " << ex.what() << "\n";
        return 1;
    }
    return status;
}

} // namespace landau
