#include "landau/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace landau {

std::string experiment_name(Experiment e) {
    switch (e) {
        case Experiment::Spectrum: return "spectrum";
        case Experiment::Hall: return "hall";
        case Experiment::Localization: return "localization";
        case Experiment::Transport: return "transport";
        case Experiment::ConnesCheck: return "connes-check";
        case Experiment::BandEdges: return "band-edges";
        case Experiment::Sweep: return "sweep";
    }
    return "?";
}

config_error::config_error(std::vector<std::string> v)
    : argument_error([&v] {
          std::ostringstream os;
          os << "invalid configuration (" << v.size() << " violation"
             << (v.size() == 1 ? "" : "s") << "):";
          for (const std::string& s : v) os << "\n  - " << s;
          return os.str();
      }()),
      violations(std::move(v)) {}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

int levenshtein(const std::string& a, const std::string& b) {
    std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                               prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::string nearest(const std::string& key, const std::vector<std::string>& known) {
    std::string best;
    int best_d = 1 << 30;
    for (const std::string& k : known) {
        const int d = levenshtein(key, k);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best_d <= std::max<int>(2, static_cast<int>(key.size()) / 2) ? best : "";
}

/// Collects all schema violations; values are read through typed getters that
/// record defaults and range failures instead of throwing immediately.
struct Checker {
    std::vector<std::string> violations;
    std::vector<std::string>* defaulted = nullptr;

    void fail(const std::string& path, const std::string& what) {
        violations.push_back(path + ": " + what);
    }

    void check_keys(const json& obj, const std::string& path,
                    const std::vector<std::string>& known) {
        if (!obj.is_object()) {
            fail(path, "expected a JSON object");
            return;
        }
        for (const auto& [key, _] : obj.items()) {
            if (std::find(known.begin(), known.end(), key) != known.end())
                continue;
            std::string msg = "unknown key '" + key + "'";
            const std::string hint = nearest(key, known);
            if (!hint.empty()) msg += " (did you mean '" + hint + "'?)";
            fail(path, msg);
        }
    }

    template <typename T>
    T get(const json& obj, const std::string& path, const std::string& key,
          T fallback, bool* present = nullptr) {
        if (!obj.is_object() || !obj.contains(key)) {
            if (defaulted) defaulted->push_back(path + "." + key);
            if (present) *present = false;
            return fallback;
        }
        if (present) *present = true;
        try {
            return obj.at(key).get<T>();
        } catch (const json::exception&) {
            fail(path + "." + key, "has the wrong type");
            return fallback;
        }
    }

    double get_range(const json& obj, const std::string& path,
                     const std::string& key, double fallback, double lo,
                     double hi) {
        const double v = get<double>(obj, path, key, fallback);
        if (!(v >= lo && v <= hi)) {
            std::ostringstream os;
            os << "value " << v << " outside [" << lo << ", " << hi << "]";
            fail(path + "." + key, os.str());
            return fallback;
        }
        return v;
    }
};

DisorderModel parse_disorder(Checker& ck, const json& obj,
                             const std::string& path) {
    ck.check_keys(obj, path, {"kind", "m1", "m2", "lambda", "eta", "c"});
    DisorderModel d;
    const std::string kind = ck.get<std::string>(obj, path, "kind", "uniform");
    if (kind == "uniform")
        d.kind = DisorderKind::Uniform;
    else if (kind == "polynomial-eta")
        d.kind = DisorderKind::PolynomialEta;
    else if (kind == "constant")
        d.kind = DisorderKind::Constant;
    else
        ck.fail(path + ".kind",
                "must be one of uniform, polynomial-eta, constant");
    d.m1 = ck.get_range(obj, path, "m1", 1.0, 0.0, 1e6);
    d.m2 = ck.get_range(obj, path, "m2", 1.0, 0.0, 1e6);
    d.lambda = ck.get_range(obj, path, "lambda", 0.0, 0.0, 1e6);
    d.eta = ck.get_range(obj, path, "eta", 1.0, 1e-12, 1e6);
    d.c = ck.get_range(obj, path, "c", 0.0, -1e6, 1e6);
    if (d.m1 + d.m2 <= 0.0) ck.fail(path, "m1 + m2 must be positive");
    return d;
}

ModelConfig parse_model(Checker& ck, const json& obj, const std::string& path) {
    ck.check_keys(obj, path,
                  {"type", "lx", "ly", "boundary", "flux", "lll", "disorder"});
    ModelConfig m;
    const std::string type = ck.get<std::string>(obj, path, "type", "hofstadter");
    if (type == "hofstadter")
        m.type = ModelConfig::Type::Hofstadter;
    else if (type == "lll")
        m.type = ModelConfig::Type::LLL;
    else
        ck.fail(path + ".type", "must be 'hofstadter' or 'lll'");

    m.geom.lx = static_cast<int>(ck.get_range(obj, path, "lx", 12, 2, 512));
    m.geom.ly = static_cast<int>(ck.get_range(obj, path, "ly", 12, 2, 512));
    const std::string boundary =
        ck.get<std::string>(obj, path, "boundary", "open");
    if (boundary == "open")
        m.geom.boundary = Boundary::Open;
    else if (boundary == "magnetic-periodic")
        m.geom.boundary = Boundary::MagneticPeriodic;
    else
        ck.fail(path + ".boundary", "must be 'open' or 'magnetic-periodic'");

    if (obj.is_object() && obj.contains("flux")) {
        const json& f = obj.at("flux");
        ck.check_keys(f, path + ".flux", {"p", "q"});
        const int p = static_cast<int>(ck.get_range(f, path + ".flux", "p", 0,
                                                    -1024, 1024));
        const int q = static_cast<int>(ck.get_range(f, path + ".flux", "q", 1,
                                                    1, 1024));
        try {
            m.flux = FluxRational::make(p, q);
        } catch (const std::exception& ex) {
            ck.fail(path + ".flux", ex.what());
        }
    } else if (ck.defaulted) {
        ck.defaulted->push_back(path + ".flux");
    }

    if (obj.is_object() && obj.contains("lll")) {
        const json& l = obj.at("lll");
        ck.check_keys(l, path + ".lll",
                      {"b", "n_max", "n_phi", "profile", "dimple_depth",
                       "quad_spacing", "dim_cap"});
        m.lll.b = ck.get_range(l, path + ".lll", "b", 1.0, 1e-6, 1e3);
        m.lll.n_max =
            static_cast<int>(ck.get_range(l, path + ".lll", "n_max", 1, 1, 64));
        m.lll.n_phi =
            static_cast<int>(ck.get_range(l, path + ".lll", "n_phi", 8, 1, 4096));
        const std::string prof =
            ck.get<std::string>(l, path + ".lll", "profile", "flat");
        if (prof == "flat")
            m.lll.profile.kind = SiteProfileKind::Flat;
        else if (prof == "dimple")
            m.lll.profile.kind = SiteProfileKind::Dimple;
        else
            ck.fail(path + ".lll.profile", "must be 'flat' or 'dimple'");
        m.lll.profile.depth =
            ck.get_range(l, path + ".lll", "dimple_depth", 0.0, 0.0, 0.999);
        m.lll.quad_spacing =
            ck.get_range(l, path + ".lll", "quad_spacing", 0.05, 1e-3, 0.5);
        m.lll.dim_cap = static_cast<int>(
            ck.get_range(l, path + ".lll", "dim_cap", 4096, 1, 65536));
    } else if (ck.defaulted) {
        ck.defaulted->push_back(path + ".lll");
    }

    if (obj.is_object() && obj.contains("disorder"))
        m.disorder = parse_disorder(ck, obj.at("disorder"), path + ".disorder");
    else if (ck.defaulted)
        ck.defaulted->push_back(path + ".disorder");
    return m;
}

void parse_ensemble(Checker& ck, const json& obj, const std::string& path,
                    EnsembleSpec& e) {
    ck.check_keys(obj, path,
                  {"n_realizations", "base_seed", "energies", "lambdas", "sizes",
                   "fluxes", "observables", "kernel_radius", "q", "beta",
                   "moment_p", "moment_window", "moment_t_max", "moment_dt",
                   "moment_t_avg", "dim_cap"});
    e.n_realizations = static_cast<int>(
        ck.get_range(obj, path, "n_realizations", 1, 1, 100000));
    e.base_seed = ck.get<std::uint64_t>(obj, path, "base_seed", 0);
    e.energies = ck.get<std::vector<double>>(obj, path, "energies", {0.0});
    e.lambdas = ck.get<std::vector<double>>(obj, path, "lambdas", {});
    e.sizes = ck.get<std::vector<int>>(obj, path, "sizes", {});
    e.observables = ck.get<std::vector<std::string>>(obj, path, "observables",
                                                     {"ids"});
    if (obj.is_object() && obj.contains("fluxes")) {
        try {
            for (const json& f : obj.at("fluxes"))
                e.fluxes.push_back(FluxRational::make(f.at("p").get<int>(),
                                                      f.at("q").get<int>()));
        } catch (const std::exception& ex) {
            ck.fail(path + ".fluxes", ex.what());
        }
    } else if (ck.defaulted) {
        ck.defaulted->push_back(path + ".fluxes");
    }
    e.kernel_radius =
        static_cast<int>(ck.get_range(obj, path, "kernel_radius", 8, 1, 64));
    e.q = ck.get_range(obj, path, "q", 2.0, 1.0, 16.0);
    e.beta = ck.get_range(obj, path, "beta", 0.9, 1e-6, 1.0);
    e.moment_p = ck.get_range(obj, path, "moment_p", 2.0, 0.0, 16.0);
    e.moment_window = ck.get_range(obj, path, "moment_window", 0.5, 1e-6, 1e3);
    e.moment_t_max = ck.get_range(obj, path, "moment_t_max", 200.0, 1e-3, 1e6);
    e.moment_dt = ck.get_range(obj, path, "moment_dt", 2.0, 1e-6, 1e5);
    e.moment_t_avg = ck.get_range(obj, path, "moment_t_avg", 50.0, 1e-6, 1e6);
    e.dim_cap =
        static_cast<int>(ck.get_range(obj, path, "dim_cap", 4096, 1, 65536));
    const auto& reg = EnsembleSpec::registered_observables();
    for (const std::string& o : e.observables)
        if (std::find(reg.begin(), reg.end(), o) == reg.end()) {
            std::string msg = "unknown observable '" + o + "'";
            const std::string hint = nearest(o, reg);
            if (!hint.empty()) msg += " (did you mean '" + hint + "'?)";
            ck.fail(path + ".observables", msg);
        }
}

} // namespace

RunConfig parse_config_json(const json& root) {
    RunConfig cfg;
    Checker ck;
    ck.defaulted = &cfg.defaulted;

    ck.check_keys(root, "config",
                  {"experiment", "model", "ensemble", "connes", "edges",
                   "output", "tolerances"});

    const std::string exp =
        ck.get<std::string>(root, "config", "experiment", "spectrum");
    const std::vector<std::pair<std::string, Experiment>> experiments = {
        {"spectrum", Experiment::Spectrum},
        {"hall", Experiment::Hall},
        {"localization", Experiment::Localization},
        {"transport", Experiment::Transport},
        {"connes-check", Experiment::ConnesCheck},
        {"band-edges", Experiment::BandEdges},
        {"sweep", Experiment::Sweep}};
    bool found = false;
    std::vector<std::string> names;
    for (const auto& [name, value] : experiments) {
        names.push_back(name);
        if (name == exp) {
            cfg.experiment = value;
            found = true;
        }
    }
    if (!found) {
        std::string msg = "unknown experiment '" + exp + "'";
        const std::string hint = nearest(exp, names);
        if (!hint.empty()) msg += " (did you mean '" + hint + "'?)";
        ck.fail("config.experiment", msg);
    }

    if (root.is_object() && root.contains("model"))
        cfg.ensemble.model = parse_model(ck, root.at("model"), "config.model");
    else
        cfg.defaulted.push_back("config.model");

    if (root.is_object() && root.contains("ensemble"))
        parse_ensemble(ck, root.at("ensemble"), "config.ensemble", cfg.ensemble);
    else
        cfg.defaulted.push_back("config.ensemble");
    if (cfg.ensemble.energies.empty()) cfg.ensemble.energies = {0.0};
    if (cfg.ensemble.observables.empty()) cfg.ensemble.observables = {"ids"};

    if (root.is_object() && root.contains("connes")) {
        const json& c = root.at("connes");
        ck.check_keys(c, "config.connes", {"u", "v", "r"});
        auto vec2 = [&](const std::string& key, Eigen::Vector2i fallback) {
            const auto v = ck.get<std::vector<int>>(c, "config.connes", key,
                                                    {fallback[0], fallback[1]});
            if (v.size() != 2) {
                ck.fail("config.connes." + key, "expected a 2-vector");
                return fallback;
            }
            return Eigen::Vector2i(v[0], v[1]);
        };
        cfg.connes_u = vec2("u", cfg.connes_u);
        cfg.connes_v = vec2("v", cfg.connes_v);
        cfg.connes_r = ck.get_range(c, "config.connes", "r", 400.0, 8.0, 1e5);
    } else {
        cfg.defaulted.push_back("config.connes");
    }

    if (root.is_object() && root.contains("edges")) {
        const json& b = root.at("edges");
        ck.check_keys(b, "config.edges", {"n", "lambdas"});
        cfg.edge_level =
            static_cast<int>(ck.get_range(b, "config.edges", "n", 1, 1, 64));
        cfg.edge_lambdas = ck.get<std::vector<double>>(b, "config.edges",
                                                       "lambdas", {0.1, 0.5, 1.0});
        for (double l : cfg.edge_lambdas)
            if (l <= 0.0) ck.fail("config.edges.lambdas", "lambdas must be > 0");
    } else {
        cfg.defaulted.push_back("config.edges");
    }

    if (root.is_object() && root.contains("output")) {
        const json& o = root.at("output");
        ck.check_keys(o, "config.output", {"directory", "formats"});
        cfg.out_dir = ck.get<std::string>(o, "config.output", "directory", "out");
        const auto formats = ck.get<std::vector<std::string>>(
            o, "config.output", "formats", {"csv", "json"});
        for (const std::string& f : formats)
            if (f != "csv" && f != "json")
                ck.fail("config.output.formats", "unknown format '" + f + "'");
    } else {
        cfg.defaulted.push_back("config.output");
    }

    if (root.is_object() && root.contains("tolerances")) {
        const json& t = root.at("tolerances");
        ck.check_keys(t, "config.tolerances", {"integer_threshold"});
        cfg.integer_threshold = ck.get_range(t, "config.tolerances",
                                             "integer_threshold", 0.05, 0.0, 0.5);
    } else {
        cfg.defaulted.push_back("config.tolerances");
    }

    if (!ck.violations.empty()) throw config_error(std::move(ck.violations));

    cfg.normalized = json{
        {"experiment", experiment_name(cfg.experiment)},
        {"model", cfg.ensemble.model.describe()},
        {"ensemble",
         {{"n_realizations", cfg.ensemble.n_realizations},
          {"base_seed", cfg.ensemble.base_seed},
          {"energies", cfg.ensemble.energies},
          {"lambdas", cfg.ensemble.lambdas},
          {"sizes", cfg.ensemble.sizes},
          {"observables", cfg.ensemble.observables},
          {"kernel_radius", cfg.ensemble.kernel_radius},
          {"q", cfg.ensemble.q},
          {"beta", cfg.ensemble.beta},
          {"moment_p", cfg.ensemble.moment_p},
          {"moment_window", cfg.ensemble.moment_window},
          {"moment_t_max", cfg.ensemble.moment_t_max},
          {"moment_dt", cfg.ensemble.moment_dt},
          {"moment_t_avg", cfg.ensemble.moment_t_avg},
          {"dim_cap", cfg.ensemble.dim_cap}}},
        {"connes",
         {{"u", {cfg.connes_u[0], cfg.connes_u[1]}},
          {"v", {cfg.connes_v[0], cfg.connes_v[1]}},
          {"r", cfg.connes_r}}},
        {"edges", {{"n", cfg.edge_level}, {"lambdas", cfg.edge_lambdas}}},
        {"output", {{"directory", cfg.out_dir.string()}}},
        {"tolerances", {{"integer_threshold", cfg.integer_threshold}}}};
    return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw argument_error("cannot open config file: " + path.string());
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& ex) {
        throw config_error({std::string("malformed JSON: ") + ex.what()});
    }
    return parse_config_json(root);
}

} // namespace landau
