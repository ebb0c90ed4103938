#include "landau/model.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace landau {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Uniform double in [0,1) from the top 53 bits; the std distributions are
// implementation-defined, this keeps realizations bit-identical everywhere.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace

void LatticeGeometry::validate() const {
    if (lx < 2 || ly < 2)
        throw geometry_error("lattice geometry requires Lx >= 2 and Ly >= 2");
}

FluxRational FluxRational::make(int p, int q) {
    if (q <= 0) throw parameter_error("flux denominator q must be positive");
    if (p < 0 || p >= q)
        throw parameter_error("flux p/q must satisfy 0 <= p/q < 1");
    int g = std::gcd(p == 0 ? q : p, q);
    return FluxRational{p / g, q / g};
}

void DisorderModel::validate() const {
    if (m1 < 0.0 || m2 < 0.0)
        throw parameter_error("disorder support bounds M1, M2 must be >= 0");
    if (m1 + m2 <= 0.0)
        throw parameter_error("disorder requires M1 + M2 > 0");
    if (lambda < 0.0)
        throw parameter_error("disorder coupling lambda must be >= 0");
    if (kind == DisorderKind::PolynomialEta && eta <= 0.0)
        throw parameter_error("polynomial-eta disorder requires eta > 0");
    if (kind == DisorderKind::Constant && (c < -m1 || c > m2))
        throw parameter_error("constant disorder value outside [-M1, M2]");
}

DisorderRealization sample_disorder(const DisorderModel& model, int n_sites,
                                    std::uint64_t seed) {
    model.validate();
    if (n_sites < 1) throw argument_error("sample_disorder: n_sites must be >= 1");

    DisorderRealization r;
    r.seed = seed;
    r.omega.resize(static_cast<std::size_t>(n_sites));

    std::mt19937_64 rng(seed);
    switch (model.kind) {
        case DisorderKind::Constant:
            std::fill(r.omega.begin(), r.omega.end(), model.c);
            break;
        case DisorderKind::Uniform:
            for (double& w : r.omega)
                w = -model.m1 + (model.m1 + model.m2) * uniform01(rng);
            break;
        case DisorderKind::PolynomialEta:
            // |s| has density (eta+1)(1-|s|)^eta on [0,1]; invert the CDF,
            // then pick the sign and rescale [-1,1] -> [-M1,M2].
            for (double& w : r.omega) {
                double u = uniform01(rng);
                double mag = 1.0 - std::pow(1.0 - u, 1.0 / (model.eta + 1.0));
                double s = (uniform01(rng) < 0.5) ? -mag : mag;
                w = 0.5 * (model.m2 - model.m1) + 0.5 * (model.m1 + model.m2) * s;
            }
            break;
    }
    return r;
}

double HermitianOperator::hermiticity_defect() const {
    return (entries - entries.adjoint()).cwiseAbs().maxCoeff();
}

HermitianOperator build_hofstadter(const LatticeGeometry& geom,
                                   const FluxRational& flux,
                                   const DisorderModel& disorder,
                                   const DisorderRealization& realization,
                                   Gauge gauge) {
    geom.validate();
    disorder.validate();
    if (static_cast<int>(realization.omega.size()) != geom.n_sites())
        throw argument_error("disorder realization not sized to the geometry");
    if (geom.boundary == Boundary::MagneticPeriodic) {
        if (flux.p != 0 && geom.lx % flux.q != 0)
            throw geometry_error(
                "magnetic-periodic boundary requires q | Lx for flux p/q");
        double cells = flux.alpha() * geom.lx * geom.ly;
        if (std::abs(cells - std::round(cells)) > 1e-9)
            throw geometry_error("total flux through the torus must be integer");
        if (gauge == Gauge::Symmetric)
            throw geometry_error(
                "symmetric gauge is only supported on open boundaries");
    }

    const int n = geom.n_sites();
    const double alpha = flux.alpha();
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
    const std::complex<double> I(0.0, 1.0);

    auto add_hop = [&](int to, int from, std::complex<double> amp) {
        h(to, from) += amp;
        h(from, to) += std::conj(amp);
    };

    for (int y = 0; y < geom.ly; ++y) {
        for (int x = 0; x < geom.lx; ++x) {
            const int s = geom.site_index(x, y);
            // +x bond
            if (x + 1 < geom.lx || geom.boundary == Boundary::MagneticPeriodic) {
                const int t = geom.site_index((x + 1) % geom.lx, y);
                std::complex<double> amp = -1.0;
                if (gauge == Gauge::Symmetric)
                    amp = -std::exp(-I * std::numbers::pi * alpha * double(y));
                add_hop(t, s, amp);
            }
            // +y bond; Landau gauge carries the full Peierls phase here
            if (y + 1 < geom.ly || geom.boundary == Boundary::MagneticPeriodic) {
                const int t = geom.site_index(x, (y + 1) % geom.ly);
                std::complex<double> amp =
                    (gauge == Gauge::Landau)
                        ? -std::exp(I * two_pi * alpha * double(x))
                        : -std::exp(I * std::numbers::pi * alpha * double(x));
                add_hop(t, s, amp);
            }
            h(s, s) += disorder.lambda * realization.omega[static_cast<std::size_t>(s)];
        }
    }

    HermitianOperator op;
    op.entries = std::move(h);
    op.meta = {{"model", "hofstadter"},
               {"lx", geom.lx},
               {"ly", geom.ly},
               {"boundary", geom.boundary == Boundary::Open ? "open" : "magnetic-periodic"},
               {"flux_p", flux.p},
               {"flux_q", flux.q},
               {"lambda", disorder.lambda},
               {"seed", realization.seed},
               {"gauge", gauge == Gauge::Landau ? "landau" : "symmetric"}};
    return op;
}

double SiteProfile::u_minus() const {
    if (kind == SiteProfileKind::Flat) return 1.0;
    return (1.0 - depth) * (1.0 - depth);
}

double SiteProfile::value(double sx, double sy) const {
    if (kind == SiteProfileKind::Flat) return 1.0;
    auto f = [&](double t) { return 1.0 - 0.5 * depth * (1.0 - std::cos(two_pi * t)); };
    return f(sx) * f(sy);
}

double LLLBasisSpec::torus_side() const { return std::sqrt(two_pi * n_phi / b); }

int LLLBasisSpec::cells_per_side() const {
    return std::max(2, static_cast<int>(std::lround(torus_side())));
}

void LLLBasisSpec::validate() const {
    if (b <= 0.0) throw parameter_error("LLL basis requires B > 0");
    if (n_max < 1) throw parameter_error("LLL basis requires n_max >= 1");
    if (n_phi < 1) throw parameter_error("LLL basis requires N_phi >= 1");
    if (profile.kind == SiteProfileKind::Dimple &&
        (profile.depth <= 0.0 || profile.depth >= 1.0))
        throw parameter_error("dimple profile depth must lie in (0,1)");
    if (quad_spacing <= 0.0)
        throw parameter_error("quadrature spacing must be positive");
    if (dim() > dim_cap)
        throw resource_error("LLL basis dimension n_max*N_phi exceeds the cap");
}

namespace {

struct LLLQuadrature {
    Eigen::MatrixXcd phi;          // n_points x dim, basis values
    std::vector<int> point_cell;   // disorder cell of each grid point
    std::vector<double> point_u;   // profile value at each grid point
    double weight;                 // uniform quadrature weight h^2
    Eigen::MatrixXcd g_inv_sqrt;   // Gram^{-1/2}
};

// Normalized oscillator eigenfunctions for -d^2/dx^2 + B^2 x^2 at all retained
// levels, evaluated on a vector of displacements.
void oscillator_functions(double b, int n_levels, const Eigen::VectorXd& xi,
                          Eigen::MatrixXd& out) {
    const auto m = xi.size();
    out.resize(n_levels, m);
    const double norm0 = std::pow(b / std::numbers::pi, 0.25);
    for (Eigen::Index i = 0; i < m; ++i) {
        double x = xi[i];
        double h0 = norm0 * std::exp(-0.5 * b * x * x);
        out(0, i) = h0;
        if (n_levels > 1) out(1, i) = std::sqrt(2.0 * b) * x * h0;
        for (int n = 2; n < n_levels; ++n)
            out(n, i) = (std::sqrt(2.0 * b) * x * out(n - 1, i) -
                         std::sqrt(double(n - 1)) * out(n - 2, i)) /
                        std::sqrt(double(n));
    }
}

LLLQuadrature build_lll_quadrature(const LLLBasisSpec& spec) {
    spec.validate();
    const double L = spec.torus_side();
    const int cells = spec.cells_per_side();
    const double cell = L / cells;
    const double h_target = spec.quad_spacing / std::sqrt(spec.b);
    const int sub = std::max(2, static_cast<int>(std::ceil(cell / h_target)));
    const int np = cells * sub;           // grid points per side, cell-aligned
    const double h = L / np;
    const int dim = spec.dim();

    LLLQuadrature quad;
    quad.weight = h * h;
    quad.phi.resize(static_cast<Eigen::Index>(np) * np, dim);
    quad.point_cell.resize(static_cast<std::size_t>(np) * np);
    quad.point_u.resize(static_cast<std::size_t>(np) * np);

    // Midpoint grid; cell-aligned so the flat profile never straddles a node.
    Eigen::VectorXd xs(np), ys(np);
    for (int i = 0; i < np; ++i) xs[i] = ys[i] = (i + 0.5) * h;

    for (int iy = 0; iy < np; ++iy) {
        for (int ix = 0; ix < np; ++ix) {
            const std::size_t p = static_cast<std::size_t>(ix) + std::size_t(np) * iy;
            const int cx = ix / sub, cy = iy / sub;
            quad.point_cell[p] = cx + cells * cy;
            const double sx = (xs[ix] - (cx + 0.5) * cell) / cell;
            const double sy = (ys[iy] - (cy + 0.5) * cell) / cell;
            quad.point_u[p] = spec.profile.value(sx, sy);
        }
    }

    // Landau-gauge torus eigenfunctions with periodic images in x; each image
    // term is an exact eigenfunction at level n, so the kinetic part is
    // diag(B_n) in this basis.
    quad.phi.setZero();
    const std::complex<double> I(0.0, 1.0);
    Eigen::MatrixXd osc;
    Eigen::VectorXd xi(np);
    const double y_norm = 1.0 / std::sqrt(L);
    for (int j = 0; j < spec.n_phi; ++j) {
        const double xj = double(j) * L / spec.n_phi;
        const double kj = spec.b * xj;
        for (int m = -1; m <= 1; ++m) {
            for (int i = 0; i < np; ++i) xi[i] = xs[i] - xj - m * L;
            oscillator_functions(spec.b, spec.n_max, xi, osc);
            const double km = kj + m * spec.b * L;
            Eigen::VectorXcd py(np);
            for (int i = 0; i < np; ++i) py[i] = y_norm * std::exp(I * km * ys[i]);
            for (int n = 0; n < spec.n_max; ++n) {
                const int col = n * spec.n_phi + j;
                for (int iy = 0; iy < np; ++iy) {
                    const std::complex<double> ph = py[iy];
                    for (int ix = 0; ix < np; ++ix)
                        quad.phi(static_cast<Eigen::Index>(ix) +
                                     static_cast<Eigen::Index>(np) * iy,
                                 col) += osc(n, ix) * ph;
                }
            }
        }
    }

    Eigen::MatrixXcd gram = quad.weight * (quad.phi.adjoint() * quad.phi);
    gram = 0.5 * (gram + gram.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
    if (es.info() != Eigen::Success)
        throw numerical_error("LLL Gram eigendecomposition failed", -1.0);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < 0.2)
        throw numerical_error("LLL quadrature basis nearly degenerate", min_eig);
    Eigen::VectorXd inv_sqrt = es.eigenvalues().array().rsqrt();
    quad.g_inv_sqrt =
        es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint();
    return quad;
}

Eigen::MatrixXcd lll_potential_from_quadrature(const LLLQuadrature& quad,
                                               const std::vector<double>& omega) {
    const Eigen::Index npts = quad.phi.rows();
    Eigen::VectorXd v(npts);
    for (Eigen::Index p = 0; p < npts; ++p)
        v[p] = quad.weight * omega[static_cast<std::size_t>(
                   quad.point_cell[static_cast<std::size_t>(p)])] *
               quad.point_u[static_cast<std::size_t>(p)];
    Eigen::MatrixXcd a = quad.phi.adjoint() * v.asDiagonal() * quad.phi;
    Eigen::MatrixXcd vt = quad.g_inv_sqrt * a * quad.g_inv_sqrt;
    return 0.5 * (vt + vt.adjoint()).eval();
}

} // namespace

Eigen::MatrixXcd lll_potential_matrix(const LLLBasisSpec& spec,
                                      const std::vector<double>& omega) {
    if (static_cast<int>(omega.size()) != spec.n_cells())
        throw argument_error("omega not sized to the LLL disorder cells");
    return lll_potential_from_quadrature(build_lll_quadrature(spec), omega);
}

HermitianOperator build_lll(const LLLBasisSpec& spec,
                            const DisorderModel& disorder,
                            const DisorderRealization& realization) {
    disorder.validate();
    Eigen::MatrixXcd v = lll_potential_matrix(spec, realization.omega);

    const int dim = spec.dim();
    Eigen::MatrixXcd h = disorder.lambda * v;
    const std::vector<double> levels = landau_levels(spec.b, spec.n_max);
    for (int n = 0; n < spec.n_max; ++n)
        for (int j = 0; j < spec.n_phi; ++j)
            h(n * spec.n_phi + j, n * spec.n_phi + j) += levels[static_cast<std::size_t>(n)];

    HermitianOperator op;
    op.entries = std::move(h);
    op.meta = {{"model", "lll"},
               {"b", spec.b},
               {"n_max", spec.n_max},
               {"n_phi", spec.n_phi},
               {"cells_per_side", spec.cells_per_side()},
               {"quad_spacing", spec.quad_spacing},
               {"u_minus", spec.profile.u_minus()},
               {"lambda", disorder.lambda},
               {"seed", realization.seed},
               {"dim", dim}};
    return op;
}

std::vector<double> landau_levels(double b, int n_max) {
    if (b <= 0.0) throw parameter_error("landau_levels requires B > 0");
    if (n_max < 1) throw parameter_error("landau_levels requires n_max >= 1");
    std::vector<double> out(static_cast<std::size_t>(n_max));
    for (int n = 1; n <= n_max; ++n)
        out[static_cast<std::size_t>(n - 1)] = (2.0 * n - 1.0) * b;
    return out;
}

Eigen::MatrixXcd magnetic_translation(const LatticeGeometry& geom,
                                      const FluxRational& flux,
                                      int a1, int a2) {
    geom.validate();
    if (geom.boundary != Boundary::MagneticPeriodic)
        throw geometry_error("magnetic translations require the torus");
    if ((flux.p * a1) % flux.q != 0)
        throw geometry_error(
            "translation vector must lie on the magnetic superlattice "
            "(alpha * a1 integer)");

    const int n = geom.n_sites();
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(n, n);
    const std::complex<double> I(0.0, 1.0);
    const double alpha = flux.alpha();
    auto wrap = [](int v, int m) { return ((v % m) + m) % m; };
    for (int y = 0; y < geom.ly; ++y) {
        for (int x = 0; x < geom.lx; ++x) {
            const int from = geom.site_index(wrap(x - a1, geom.lx), wrap(y - a2, geom.ly));
            // Phase compensating the Landau-gauge shift; identically 1 on the
            // magnetic superlattice but kept for clarity.
            const std::complex<double> phase =
                std::exp(I * two_pi * alpha * double(a1) * double(y));
            u(geom.site_index(x, y), from) = phase;
        }
    }
    return u;
}

std::vector<double> shift_disorder(const LatticeGeometry& geom,
                                   const std::vector<double>& omega,
                                   int a1, int a2) {
    if (static_cast<int>(omega.size()) != geom.n_sites())
        throw argument_error("omega not sized to the geometry");
    auto wrap = [](int v, int m) { return ((v % m) + m) % m; };
    std::vector<double> out(omega.size());
    for (int y = 0; y < geom.ly; ++y)
        for (int x = 0; x < geom.lx; ++x)
            out[static_cast<std::size_t>(geom.site_index(x, y))] =
                omega[static_cast<std::size_t>(
                    geom.site_index(wrap(x - a1, geom.lx), wrap(y - a2, geom.ly)))];
    return out;
}

int ModelConfig::n_disorder_sites() const {
    return type == Type::Hofstadter ? geom.n_sites() : lll.n_cells();
}

HermitianOperator ModelConfig::build(const DisorderRealization& realization) const {
    return type == Type::Hofstadter
               ? build_hofstadter(geom, flux, disorder, realization)
               : build_lll(lll, disorder, realization);
}

json ModelConfig::describe() const {
    json j;
    if (type == Type::Hofstadter) {
        j["type"] = "hofstadter";
        j["lx"] = geom.lx;
        j["ly"] = geom.ly;
        j["boundary"] =
            geom.boundary == Boundary::Open ? "open" : "magnetic-periodic";
        j["flux"] = {{"p", flux.p}, {"q", flux.q}};
    } else {
        j["type"] = "lll";
        j["b"] = lll.b;
        j["n_max"] = lll.n_max;
        j["n_phi"] = lll.n_phi;
        j["quad_spacing"] = lll.quad_spacing;
        j["profile"] = lll.profile.kind == SiteProfileKind::Flat ? "flat" : "dimple";
        if (lll.profile.kind == SiteProfileKind::Dimple)
            j["profile_depth"] = lll.profile.depth;
    }
    j["disorder"] = {{"m1", disorder.m1},
                     {"m2", disorder.m2},
                     {"lambda", disorder.lambda}};
    switch (disorder.kind) {
        case DisorderKind::Uniform: j["disorder"]["kind"] = "uniform"; break;
        case DisorderKind::Constant:
            j["disorder"]["kind"] = "constant";
            j["disorder"]["c"] = disorder.c;
            break;
        case DisorderKind::PolynomialEta:
            j["disorder"]["kind"] = "polynomial-eta";
            j["disorder"]["eta"] = disorder.eta;
            break;
    }
    return j;
}

} // namespace landau
