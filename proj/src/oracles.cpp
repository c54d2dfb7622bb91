// Reference solutions that share no code path with the Nystrom solver: special
// functions come from the standard library rather than polyscat::special.
#include <algorithm>
#include <cmath>
#include <limits>

#include "polyscat/errors.hpp"
#include "polyscat/helmholtz.hpp"

namespace polyscat {

namespace {

constexpr Complex I{0.0, 1.0};

Complex hankel(int n, double z) { return {std::cyl_bessel_j(double(n), z), std::cyl_neumann(double(n), z)}; }

Complex hankel_derivative(int n, double z) {
    if (n == 0) return -hankel(1, z);
    return 0.5 * (hankel(n - 1, z) - hankel(n + 1, z));
}

double bessel_j_derivative(int n, double z) {
    if (n == 0) return -std::cyl_bessel_j(1.0, z);
    return 0.5 * (std::cyl_bessel_j(double(n - 1), z) - std::cyl_bessel_j(double(n + 1), z));
}

Complex i_pow(int n) {
    switch (n % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

/// u^s = sum_n i^n c_n H_n(kr) e^{in(theta - theta_v)} with c_{-n} = c_n.
class DiscSeriesRepresentation final : public FieldRepresentation {
public:
    DiscSeriesRepresentation(double a, double k, Vec2 v, BoundaryCondition bc, int max_order)
        : a_(a), k_(k), theta_v_(std::atan2(v.y, v.x)) {
        const double ka = k * a;
        for (int n = 0; n <= 200; ++n) {
            const Complex c = bc == BoundaryCondition::hard ? -bessel_j_derivative(n, ka) / hankel_derivative(n, ka)
                                                             : -std::cyl_bessel_j(double(n), ka) / hankel(n, ka);
            // Stop once both the coefficient and its boundary terms are negligible.
            const double boundary_term = std::abs(c) * std::max(std::abs(hankel(n, ka)), std::abs(hankel_derivative(n, ka)));
            if (n > 0 && std::abs(c) < 1e-14 && boundary_term < 1e-18) break;
            coeff_.push_back(c);
            if (max_order >= 0 && n >= max_order) break;
        }
    }

    std::string kind() const override { return "disc-series"; }
    std::size_t terms() const { return coeff_.size(); }

    Complex scattered(Vec2 x) const override {
        const double r = norm(x), phi = std::atan2(x.y, x.x) - theta_v_;
        Complex s = coeff_[0] * hankel(0, k_ * r);
        for (int n = 1; n < int(coeff_.size()); ++n)
            s += 2.0 * i_pow(n) * coeff_[std::size_t(n)] * hankel(n, k_ * r) * std::cos(n * phi);
        return s;
    }

    CVec2 scattered_grad(Vec2 x) const override {
        const double r = norm(x), theta = std::atan2(x.y, x.x), phi = theta - theta_v_;
        Complex dr = k_ * coeff_[0] * hankel_derivative(0, k_ * r);
        Complex dphi = 0.0;
        for (int n = 1; n < int(coeff_.size()); ++n) {
            const Complex c = 2.0 * i_pow(n) * coeff_[std::size_t(n)];
            dr += c * k_ * hankel_derivative(n, k_ * r) * std::cos(n * phi);
            dphi -= c * hankel(n, k_ * r) * (double(n) * std::sin(n * phi));
        }
        const Vec2 er = unit_from_angle(theta), et = perp(er);
        const Complex dt = dphi / r;
        return {dr * er.x + dt * et.x, dr * er.y + dt * et.y};
    }

    Complex far_field(Vec2 xhat) const override {
        const double phi = std::atan2(xhat.y, xhat.x) - theta_v_;
        Complex s = coeff_[0];
        for (int n = 1; n < int(coeff_.size()); ++n) s += 2.0 * coeff_[std::size_t(n)] * std::cos(n * phi);
        return std::sqrt(2.0 / (pi * k_)) * std::polar(1.0, -pi / 4.0) * s;
    }

    bool inside(Vec2 x) const override { return norm(x) < a_ * (1.0 - 1e-14); }
    double boundary_distance(Vec2 x) const override { return std::abs(norm(x) - a_); }
    double panel_size() const override { return 0.0; }
    bool exact_on_boundary() const override { return true; }
    std::vector<BoundaryProbe> boundary_probes(std::size_t per_edge) const override {
        std::vector<BoundaryProbe> out;
        const std::size_t n = 8 * per_edge;
        for (std::size_t m = 0; m < n; ++m) {
            const Vec2 e = unit_from_angle(2.0 * pi * (double(m) + 0.5) / double(n));
            out.push_back({a_ * e, e, a_});
        }
        return out;
    }

private:
    double a_, k_, theta_v_;
    std::vector<Complex> coeff_;
};

/// One basis function: a monopole Phi(x, z), or a dipole d/dz Phi(x, z) . e.
struct Source {
    Vec2 z;
    Vec2 e;
    bool dipole = false;
};

Complex source_value(double k, const Source &s, Vec2 x) {
    const Vec2 d = x - s.z;
    const double r = norm(d);
    if (!s.dipole) return (I / 4.0) * hankel(0, k * r);
    return (I * k / 4.0) * hankel(1, k * r) * (dot(d, s.e) / r);
}

CVec2 source_grad(double k, const Source &s, Vec2 x) {
    const Vec2 d = x - s.z;
    const double r = norm(d);
    if (!s.dipole) {
        const Complex c = (-I * k / 4.0) * hankel(1, k * r) / r;
        return {c * d.x, c * d.y};
    }
    const Complex g = hankel(1, k * r) / r;
    const Complex gp = k * hankel(0, k * r) / r - 2.0 * hankel(1, k * r) / (r * r);
    const Complex c = I * k / 4.0;
    const double de = dot(d, s.e);
    return {c * (g * s.e.x + de * gp * d.x / r), c * (g * s.e.y + de * gp * d.y / r)};
}

Complex source_far(double k, const Source &s, Vec2 xhat) {
    const Complex phase = std::polar(1.0, -k * dot(xhat, s.z));
    return s.dipole ? -I * k * dot(xhat, s.e) * phase : phase;
}

/// Superposition of monopoles and dipoles strictly inside the obstacle.
class MfsRepresentation final : public FieldRepresentation {
public:
    MfsRepresentation(Scatterer2D s, double k, std::vector<Source> sources, Eigen::VectorXcd coeff, double panel)
        : s_(std::move(s)), k_(k), z_(std::move(sources)), c_(std::move(coeff)), panel_(panel) {}

    std::string kind() const override { return "mfs"; }
    Complex scattered(Vec2 x) const override {
        Complex s = 0.0;
        for (std::size_t m = 0; m < z_.size(); ++m) s += c_[Eigen::Index(m)] * source_value(k_, z_[m], x);
        return s;
    }
    CVec2 scattered_grad(Vec2 x) const override {
        CVec2 g{};
        for (std::size_t m = 0; m < z_.size(); ++m) g += c_[Eigen::Index(m)] * source_grad(k_, z_[m], x);
        return g;
    }
    Complex far_field(Vec2 xhat) const override {
        Complex s = 0.0;
        for (std::size_t m = 0; m < z_.size(); ++m) s += c_[Eigen::Index(m)] * source_far(k_, z_[m], xhat);
        return std::polar(1.0, pi / 4.0) / std::sqrt(8.0 * pi * k_) * s;
    }
    bool inside(Vec2 x) const override { return s_.contains(x) && s_.boundary_distance(x) > 0.0; }
    double boundary_distance(Vec2 x) const override { return s_.boundary_distance(x); }
    double panel_size() const override { return panel_; }
    std::vector<BoundaryProbe> boundary_probes(std::size_t per_edge) const override {
        std::vector<BoundaryProbe> out;
        for (const Cell &c : s_.cells())
            for (std::size_t m = 0; m < per_edge; ++m) {
                const double sigma = 0.25 + 0.5 * (double(m) + 0.5) / double(per_edge);
                out.push_back({c.segment.at(sigma), c.normal, c.segment.length()});
            }
        return out;
    }

private:
    Scatterer2D s_;
    double k_;
    std::vector<Source> z_;
    Eigen::VectorXcd c_;
    double panel_;
};

/// Distances L exp(-4 (sqrt(n) - sqrt(j))), j = 1..n, accumulating towards zero.
std::vector<double> lightning_distances(std::size_t n, double scale) {
    std::vector<double> out;
    const double sn = std::sqrt(double(n));
    for (std::size_t j = 1; j <= n; ++j) out.push_back(scale * std::exp(-4.0 * (sn - std::sqrt(double(j)))));
    return out;
}

/// Chebyshev points on [0,1] clustered at both ends, with their quadrature weights.
void chebyshev(std::size_t m, std::vector<double> &x, std::vector<double> &w) {
    x.resize(m);
    w.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double th = pi * (double(i) + 0.5) / double(m);
        x[i] = 0.5 * (1.0 - std::cos(th));
        w[i] = 0.5 * (pi / double(m)) * std::sin(th);
    }
}

}  // namespace

WaveField disc_series(double a, const ScatterConfig &cfg, BoundaryCondition bc, std::size_t j) {
    if (!(a > 0.0)) throw ParameterError("disc radius must be positive");
    cfg.validate();
    auto rep = std::make_shared<DiscSeriesRepresentation>(a, cfg.k, cfg.direction(j), bc, -1);
    return WaveField(std::move(rep), Scatterer2D({}, bc), cfg, j);
}

WaveField disc_series_truncated(double a, const ScatterConfig &cfg, BoundaryCondition bc, std::size_t j,
                                int max_order) {
    if (!(a > 0.0)) throw ParameterError("disc radius must be positive");
    cfg.validate();
    auto rep = std::make_shared<DiscSeriesRepresentation>(a, cfg.k, cfg.direction(j), bc, max_order);
    return WaveField(std::move(rep), Scatterer2D({}, bc), cfg, j);
}

WaveField mfs_solve(const Scatterer2D &s, const ScatterConfig &cfg, std::size_t j, const MfsOptions &opt) {
    cfg.validate();
    if (s.empty()) throw ParameterError("the MFS oracle needs a nonempty scatterer");
    const IncidentWave inc = incident_field(cfg, j);
    const bool hard = s.bc() == BoundaryCondition::hard;
    const double k = cfg.k;

    double perimeter = 0.0;
    for (const Polygon &p : s.polygons()) perimeter += p.perimeter();
    const std::size_t total = opt.collocation ? opt.collocation : std::size_t(2 * cfg.quad_order);

    struct Colloc {
        Vec2 y, nu;
        double w;
    };
    std::vector<Colloc> colloc;
    std::vector<Source> sources;
    double panel = 0.0;
    std::vector<double> cx, cw;
    // A corner is sharp when the boundary turns by at least opt.sharp_turn there.
    auto sharp = [&](const Polygon &poly, std::size_t i) {
        const Vec2 a = poly.vertex(i) - poly.vertex(i + poly.size() - 1), b = poly.vertex(i + 1) - poly.vertex(i);
        return std::abs(std::atan2(cross(a, b), dot(a, b))) >= opt.sharp_turn;
    };
    for (const Cell &cell : s.cells()) {
        const double len = cell.segment.length();
        const Polygon &poly = s.polygons()[cell.polygon];
        const double cap = 0.25 * std::sqrt(std::abs(poly.signed_area()));
        const bool sharp_a = sharp(poly, cell.edge), sharp_b = sharp(poly, cell.edge + 1);
        const auto mc = std::max<std::size_t>(16, std::size_t(std::llround(double(total) * len / perimeter)));
        // Chebyshev points plus exponentially clustered points at both corners.
        chebyshev(mc, cx, cw);
        std::vector<double> sig = cx;
        for (double d : lightning_distances(opt.corner_sources * 2, 0.5)) {
            if (sharp_a) sig.push_back(d);
            if (sharp_b) sig.push_back(1.0 - d);
        }
        std::sort(sig.begin(), sig.end());
        sig.erase(std::unique(sig.begin(), sig.end()), sig.end());
        for (std::size_t i = 0; i < sig.size(); ++i) {
            const double lo = i == 0 ? 0.0 : 0.5 * (sig[i - 1] + sig[i]);
            const double hi = i + 1 == sig.size() ? 1.0 : 0.5 * (sig[i] + sig[i + 1]);
            colloc.push_back({cell.segment.at(sig[i]), cell.normal, (hi - lo) * len});
            panel = std::max(panel, (hi - lo) * len);
        }
        const std::size_t ms = mc / 2;
        chebyshev(ms, cx, cw);
        for (std::size_t i = 0; i < ms; ++i) {
            const Vec2 y = cell.segment.at(cx[i]);
            const double to_sharp = std::min(sharp_a ? cx[i] * len : cap / opt.depth, sharp_b ? (1.0 - cx[i]) * len : cap / opt.depth);
            double depth = std::min(opt.depth * to_sharp, cap);
            Vec2 z = y - depth * cell.normal;
            for (int tries = 0; tries < 30 && !(poly.contains(z) && poly.boundary_distance(z) >= 0.25 * depth); ++tries) {
                depth *= 0.5;
                z = y - depth * cell.normal;
            }
            if (poly.contains(z) && poly.boundary_distance(z) > 0.0) sources.push_back({z, {}, false});
        }
    }
    // Corner clusters along the interior bisector of every convex corner.
    for (const Polygon &poly : s.polygons()) {
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const Vec2 v = poly.vertex(i);
            const Vec2 a = poly.vertex(i + poly.size() - 1) - v, b = poly.vertex(i + 1) - v;
            if (cross(b, a) <= 0.0 || !sharp(poly, i)) continue;  // the exterior field is smooth there
            const Vec2 bis = normalized(normalized(a) + normalized(b));
            const double scale = 0.5 * std::min(norm(a), norm(b));
            for (double d : lightning_distances(opt.corner_sources, scale)) {
                const Vec2 z = v + d * bis;
                if (!(poly.contains(z) && poly.boundary_distance(z) > 0.0)) continue;
                sources.push_back({z, {}, false});
                sources.push_back({z, {1.0, 0.0}, true});
                sources.push_back({z, {0.0, 1.0}, true});
            }
        }
    }
    if (sources.empty()) throw SolverError("MFS oracle could not place any source inside the obstacle");

    const auto rows = Eigen::Index(colloc.size()), cols = Eigen::Index(sources.size());
    Eigen::MatrixXcd a(rows, cols);
    Eigen::VectorXcd b(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const Colloc &c = colloc[std::size_t(i)];
        const double sw = std::sqrt(c.w);
        for (Eigen::Index m = 0; m < cols; ++m) {
            const Source &src = sources[std::size_t(m)];
            a(i, m) = sw * (hard ? dot(source_grad(k, src, c.y), c.nu) : source_value(k, src, c.y));
        }
        b[i] = -sw * (hard ? dot(inc.grad(c.y), c.nu) : inc.value(c.y));
    }
    // Unit columns keep near-corner dipoles from dominating the singular values.
    Eigen::VectorXd colscale = a.colwise().norm().transpose();
    for (Eigen::Index m = 0; m < cols; ++m) a.col(m) /= colscale[m];
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(opt.svd_threshold);
    Eigen::VectorXcd c = svd.solve(b);
    const double rel = (a * c - b).norm() / b.norm();
    if (!(rel <= opt.max_residual))
        throw SolverError("MFS oracle ill-conditioned: relative boundary residual " + std::to_string(rel));
    for (Eigen::Index m = 0; m < cols; ++m) c[m] /= colscale[m];
    auto rep = std::make_shared<MfsRepresentation>(s, k, std::move(sources), std::move(c), panel);
    return WaveField(std::move(rep), s, cfg, j);
}

}  // namespace polyscat
