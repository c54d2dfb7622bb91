#include "polyscat/helmholtz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "parallel.hpp"
#include "polyscat/errors.hpp"

namespace polyscat {

namespace {

using kernels::Execution;

class EmptyRepresentation final : public FieldRepresentation {
public:
    std::string kind() const override { return "empty"; }
    Complex scattered(Vec2) const override { return 0.0; }
    CVec2 scattered_grad(Vec2) const override { return {}; }
    Complex far_field(Vec2) const override { return 0.0; }
    bool inside(Vec2) const override { return false; }
    double boundary_distance(Vec2) const override { return std::numeric_limits<double>::infinity(); }
    double panel_size() const override { return 0.0; }
    std::vector<BoundaryProbe> boundary_probes(std::size_t) const override { return {}; }
};

std::vector<FieldRepresentation::BoundaryProbe> polygon_probes(const Scatterer2D &s, std::size_t per_edge) {
    std::vector<FieldRepresentation::BoundaryProbe> out;
    for (const Cell &c : s.cells()) {
        for (std::size_t m = 0; m < per_edge; ++m) {
            const double sigma = 0.25 + 0.5 * (double(m) + 0.5) / double(per_edge);
            out.push_back({c.segment.at(sigma), c.normal, c.segment.length()});
        }
    }
    return out;
}

/// Nystrom layer potential on a graded boundary mesh.
class LayerRepresentation final : public FieldRepresentation {
public:
    LayerRepresentation(Scatterer2D s, BoundaryMesh mesh, double k, double eta, Eigen::VectorXcd density)
        : s_(std::move(s)), mesh_(std::move(mesh)), density_(std::move(density)) {
        layer_ = {&mesh_, k, eta};
        for (std::size_t p = 0; p < mesh_.polygon_count(); ++p) panel_ = std::max(panel_, mesh_.max_spacing(p));
    }
    LayerRepresentation(const LayerRepresentation &) = delete;
    LayerRepresentation &operator=(const LayerRepresentation &) = delete;

    std::string kind() const override { return layer_.eta == 0.0 ? "nystrom-direct" : "nystrom-combined"; }
    Complex scattered(Vec2 x) const override { return kernels::potential(layer_, density_, x); }
    CVec2 scattered_grad(Vec2 x) const override { return kernels::potential_grad(layer_, density_, x); }
    Complex far_field(Vec2 xhat) const override { return kernels::far_field(layer_, density_, xhat); }
    bool inside(Vec2 x) const override { return s_.contains(x) && s_.boundary_distance(x) > 0.0; }
    double boundary_distance(Vec2 x) const override { return s_.boundary_distance(x); }
    double panel_size() const override { return panel_; }
    Complex scattered_near(Vec2 x) const override { return kernels::potential_near(layer_, density_, x); }
    CVec2 scattered_grad_near(Vec2 x) const override { return kernels::potential_grad_near(layer_, density_, x); }
    std::vector<BoundaryProbe> boundary_probes(std::size_t per_edge) const override {
        return polygon_probes(s_, per_edge);
    }
    std::vector<Complex> scattered_batch(std::span<const Vec2> xs) const override {
        return kernels::potential_batch(layer_, density_, xs);
    }
    std::vector<Complex> far_field_batch(std::span<const Vec2> dirs) const override {
        return kernels::far_field_batch(layer_, density_, dirs);
    }
    const Eigen::VectorXcd *density() const override { return &density_; }

private:
    Scatterer2D s_;
    BoundaryMesh mesh_;
    Eigen::VectorXcd density_;
    kernels::Layer layer_;
    double panel_ = 0.0;
};

/// Interior points, deepest first and mutually separated, used to suppress
/// interior resonances of the sound-hard direct equation.
std::vector<Vec2> chief_points(const Polygon &poly, int count) {
    if (count <= 0) return {};
    double xmin = poly.vertex(0).x, xmax = xmin, ymin = poly.vertex(0).y, ymax = ymin;
    for (const Vec2 &v : poly.vertices()) {
        xmin = std::min(xmin, v.x);
        xmax = std::max(xmax, v.x);
        ymin = std::min(ymin, v.y);
        ymax = std::max(ymax, v.y);
    }
    struct Cand {
        Vec2 p;
        double depth;
    };
    std::vector<Cand> cands;
    constexpr int g = 24;
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            // Irrational offsets keep candidates off symmetry lines of the obstacle.
            const Vec2 p{xmin + (xmax - xmin) * (double(i) + 0.5 + 0.1180339887) / (g + 0.5),
                         ymin + (ymax - ymin) * (double(j) + 0.5 + 0.2360679775) / (g + 0.5)};
            if (!poly.contains(p)) continue;
            cands.push_back({p, poly.boundary_distance(p)});
        }
    std::stable_sort(cands.begin(), cands.end(), [](const Cand &a, const Cand &b) { return a.depth > b.depth; });
    if (cands.empty()) return {};
    const double max_depth = cands.front().depth;
    const double sep = 0.5 * std::sqrt(std::abs(poly.signed_area()));
    std::vector<Vec2> out;
    for (const Cand &c : cands) {
        if (c.depth < 0.25 * max_depth) break;
        bool ok = true;
        for (const Vec2 &q : out) ok = ok && norm(q - c.p) >= sep;
        if (ok) out.push_back(c.p);
        if (int(out.size()) == count) break;
    }
    return out;
}

std::string violations_text(const ClassReport &r) {
    std::ostringstream os;
    for (std::size_t i = 0; i < r.violations.size(); ++i) {
        if (i) os << "; ";
        os << r.violations[i].condition << ": " << r.violations[i].detail;
    }
    return os.str();
}

double trapezoid_l2(const std::vector<Complex> &f) {
    double s = 0.0;
    for (const Complex &z : f) s += std::norm(z);
    return std::sqrt(s * 2.0 * pi / double(f.size()));
}

void check_clear(const WaveField &u, std::span<const Vec2> pts, const char *what) {
    const FieldRepresentation &rep = u.representation();
    for (const Vec2 &p : pts)
        if (rep.inside(p) || !(rep.boundary_distance(p) > 0.0))
            throw DomainError(std::string(what) + " intersects a scatterer");
}

}  // namespace

// ---- representation defaults ---------------------------------------------------

std::vector<Complex> FieldRepresentation::scattered_batch(std::span<const Vec2> xs) const {
    std::vector<Complex> out(xs.size());
    detail::for_each_index(xs.size(), Execution::parallel, [&](std::size_t i) { out[i] = scattered(xs[i]); });
    return out;
}

std::vector<Complex> FieldRepresentation::far_field_batch(std::span<const Vec2> dirs) const {
    std::vector<Complex> out(dirs.size());
    detail::for_each_index(dirs.size(), Execution::parallel, [&](std::size_t i) { out[i] = far_field(dirs[i]); });
    return out;
}

// ---- wave field ------------------------------------------------------------------

IncidentWave incident_field(const ScatterConfig &cfg, std::size_t j) { return {cfg.k, cfg.direction(j)}; }

WaveField::WaveField(std::shared_ptr<const FieldRepresentation> rep, Scatterer2D scatterer, ScatterConfig cfg,
                     std::size_t direction_index, SolveDiagnostics diag)
    : rep_(std::move(rep)),
      scatterer_(std::move(scatterer)),
      cfg_(std::move(cfg)),
      j_(direction_index),
      incident_(incident_field(cfg_, direction_index)),
      diag_(diag) {}

FieldValue WaveField::eval(Vec2 x) const {
    if (rep_->inside(x)) throw DomainError("evaluation point lies inside the scatterer");
    return {total(x), rep_->boundary_distance(x) < rep_->panel_size()};
}

FieldGradient WaveField::eval_grad(Vec2 x) const {
    if (rep_->inside(x)) throw DomainError("evaluation point lies inside the scatterer");
    return {total_grad(x), rep_->boundary_distance(x) < rep_->panel_size()};
}

std::vector<Complex> WaveField::total_batch(std::span<const Vec2> xs) const {
    std::vector<Complex> out = rep_->scattered_batch(xs);
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] += incident_.value(xs[i]);
    return out;
}

FieldValue eval(const WaveField &u, Vec2 x) { return u.eval(x); }
FieldGradient eval_grad(const WaveField &u, Vec2 x) { return u.eval_grad(x); }

FieldEvaluator evaluator(const WaveField &u) {
    return {[u](Vec2 x) { return u.total(x); }, [u](Vec2 x) { return u.total_grad(x); },
            [u](Vec2 x) { return u.in_domain(x); }};
}

// ---- solve -----------------------------------------------------------------------

WaveField solve(const Scatterer2D &s, const ScatterConfig &cfg, std::size_t j, Execution exec) {
    cfg.validate();
    const IncidentWave inc = incident_field(cfg, j);
    if (s.empty()) return WaveField(std::make_shared<EmptyRepresentation>(), s, cfg, j);
    const ClassReport report = validate_scatterer(s);
    if (!report.pass) throw ValidationError("scatterer outside its admissible class: " + violations_text(report));

    BoundaryMesh mesh(s, cfg.quad_order, cfg.grading);
    const bool hard = s.bc() == BoundaryCondition::hard;
    const double eta = hard ? 0.0 : cfg.k;
    kernels::Layer layer{&mesh, cfg.k, eta};
    const auto n = Eigen::Index(mesh.size());

    Eigen::MatrixXcd a = kernels::assemble(layer, hard ? -1.0 : 1.0, exec);
    Eigen::VectorXcd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Complex ui = inc.value(mesh.nodes()[std::size_t(i)].x);
        rhs[i] = hard ? ui : -ui;
    }

    std::vector<Vec2> chief;
    if (hard)
        for (const Polygon &poly : s.polygons()) {
            const auto pts = chief_points(poly, cfg.chief_points);
            chief.insert(chief.end(), pts.begin(), pts.end());
        }
    if (!chief.empty()) {
        const Eigen::MatrixXcd rows = kernels::potential_rows(layer, chief, exec);
        const auto c = Eigen::Index(chief.size());
        a.conservativeResize(n + c, Eigen::NoChange);
        a.bottomRows(c) = rows;
        rhs.conservativeResize(n + c);
        for (Eigen::Index i = 0; i < c; ++i) rhs[n + i] = -inc.value(chief[std::size_t(i)]);
    }

    const Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(a);
    const auto diag = qr.matrixR().diagonal().cwiseAbs();
    const double cond = diag.maxCoeff() / diag.minCoeff();
    if (!(cond <= cfg.tol.condition_max)) {
        std::ostringstream os;
        os.precision(3);
        os << "boundary system condition estimate " << cond << " exceeds " << cfg.tol.condition_max
           << " (suspected spurious resonance near k = " << cfg.k
           << " or a mesh too coarse for the corners; raise quad_order or chief_points)";
        throw SolverError(os.str());
    }
    Eigen::VectorXcd density = qr.solve(rhs);

    SolveDiagnostics d{std::size_t(n), chief.size(), cond};
    auto rep = std::make_shared<LayerRepresentation>(s, std::move(mesh), cfg.k, eta, std::move(density));
    return WaveField(std::move(rep), s, cfg, j, d);
}

// ---- far field -------------------------------------------------------------------

double FarFieldPattern::l2_norm() const { return values.empty() ? 0.0 : trapezoid_l2(values); }

FarFieldPattern far_field(const WaveField &u, std::size_t n_dirs) {
    if (n_dirs < 64) throw ParameterError("far field needs at least 64 directions");
    FarFieldPattern f;
    std::vector<Vec2> dirs(n_dirs);
    for (std::size_t m = 0; m < n_dirs; ++m) {
        f.theta.push_back(2.0 * pi * double(m) / double(n_dirs));
        dirs[m] = unit_from_angle(f.theta.back());
    }
    f.values = u.representation().far_field_batch(dirs);
    return f;
}

// ---- error metrics -----------------------------------------------------------------

std::vector<Vec2> disc_samples(Vec2 center, double radius) {
    constexpr int rings = 32, spokes = 32;
    std::vector<Vec2> pts{center};
    for (int i = 1; i <= rings; ++i) {
        const double r = radius * double(i) / rings;
        for (int l = 0; l < spokes; ++l) pts.push_back(center + r * unit_from_angle(2.0 * pi * double(l) / spokes));
    }
    return pts;
}

namespace {

SampledError sup_difference(const WaveField &u, const WaveField &v, const std::vector<Vec2> &pts, double pitch) {
    const auto a = u.total_batch(pts);
    const auto b = v.total_batch(pts);
    SampledError e{0.0, pitch, pts.size()};
    for (std::size_t i = 0; i < pts.size(); ++i) e.value = std::max(e.value, std::abs(a[i] - b[i]));
    return e;
}

}  // namespace

SampledError near_field_error(const WaveField &u, const WaveField &v, Vec2 center, double radius) {
    if (!(radius > 0.0)) throw ParameterError("probe radius must be positive");
    for (const WaveField *w : {&u, &v}) {
        const auto &rep = w->representation();
        if (rep.inside(center) || !(rep.boundary_distance(center) > radius))
            throw DomainError("probe ball intersects a scatterer");
    }
    const auto pts = disc_samples(center, radius);
    return sup_difference(u, v, pts, 2.0 * pi * radius / 32.0);
}

SampledError annulus_error(const WaveField &u, const WaveField &v, const ScatterConfig &cfg) {
    const double r0 = norm(cfg.x0);
    const double inner = r0 - cfg.rho_tilde, outer = r0 + cfg.rho_tilde;
    constexpr int rings = 17, spokes = 256;
    std::vector<Vec2> pts;
    for (int i = 0; i < rings; ++i) {
        const double r = inner + (outer - inner) * double(i) / (rings - 1);
        for (int l = 0; l < spokes; ++l) pts.push_back(r * unit_from_angle(2.0 * pi * double(l) / spokes));
    }
    // The ball around x0 is part of the annulus, so its samples are included and eps <= eps1 holds exactly.
    const auto ball = disc_samples(cfg.x0, cfg.rho_tilde);
    pts.insert(pts.end(), ball.begin(), ball.end());
    check_clear(u, pts, "probe annulus");
    check_clear(v, pts, "probe annulus");
    return sup_difference(u, v, pts, std::max(2.0 * pi * outer / spokes, (outer - inner) / (rings - 1)));
}

double far_field_error(const FarFieldPattern &f, const FarFieldPattern &g) {
    if (f.theta != g.theta) throw ParameterError("far-field patterns live on different direction grids");
    if (f.values.empty()) return 0.0;
    std::vector<Complex> diff(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) diff[i] = f.values[i] - g.values[i];
    return trapezoid_l2(diff);
}

OpticalTheorem optical_theorem_defect(const WaveField &u, std::size_t n_dirs) {
    const FarFieldPattern f = far_field(u, n_dirs);
    OpticalTheorem ot;
    const double l2 = f.l2_norm();
    ot.scattered = l2 * l2;
    const Complex forward = u.far_field(u.incident().direction);
    ot.extinction = optical_constant(u.k()) * std::imag(optical_phase() * forward);
    if (!(ot.scattered > 1e-300)) {
        ot.degenerate = true;
        return ot;
    }
    ot.defect = std::abs(ot.scattered - ot.extinction) / ot.scattered;
    return ot;
}

// ---- invariant checks ------------------------------------------------------------

BoundaryResidual boundary_residual(const WaveField &u, std::size_t samples_per_edge) {
    const FieldRepresentation &rep = u.representation();
    const bool hard = u.scatterer().bc() == BoundaryCondition::hard;
    const auto probes = rep.boundary_probes(samples_per_edge);
    const IncidentWave &inc = u.incident();
    const double k = u.k();
    BoundaryResidual out;
    out.samples = probes.size();
    std::vector<double> res(probes.size()), scale(probes.size());
    detail::for_each_index(probes.size(), Execution::parallel, [&](std::size_t i) {
        const auto &pr = probes[i];
        auto g = [&](double delta) -> Complex {
            const Vec2 x = pr.point + delta * pr.normal;
            if (hard) return dot(inc.grad(x) + rep.scattered_grad_near(x), pr.normal);
            return inc.value(x) + rep.scattered_near(x);
        };
        // Scale of the field: the larger of the total, incident and scattered parts.
        auto value = [&](double delta) {
            const Vec2 x = pr.point + delta * pr.normal;
            const Complex ui = inc.value(x), us = rep.scattered_near(x);
            return std::max({std::abs(ui + us), std::abs(ui), std::abs(us)});
        };
        if (rep.exact_on_boundary()) {
            res[i] = std::abs(g(0.0));
            scale[i] = value(0.0);
            return;
        }
        const double delta = 1e-3 * std::min(pr.length, 1.0 / k);
        // Quadratic extrapolation to the boundary from three off-boundary samples.
        res[i] = std::abs(3.0 * g(delta) - 3.0 * g(2.0 * delta) + g(3.0 * delta));
        scale[i] = value(delta);
    });
    for (std::size_t i = 0; i < probes.size(); ++i) {
        out.max_residual = std::max(out.max_residual, res[i]);
        out.field_scale = std::max(out.field_scale, scale[i]);
    }
    if (out.field_scale > 0.0) out.relative = out.max_residual / ((hard ? k : 1.0) * out.field_scale);
    return out;
}

double helmholtz_residual(const WaveField &u, std::span<const Vec2> probes, double step) {
    const double k2 = u.k() * u.k();
    double worst = 0.0;
    for (const Vec2 &x : probes) {
        auto f = [&](double dx, double dy) { return u.total(x + Vec2{dx, dy}); };
        const Complex c = f(0, 0);
        const double h = step;
        const Complex lx = (-f(2 * h, 0) + 16.0 * f(h, 0) - 30.0 * c + 16.0 * f(-h, 0) - f(-2 * h, 0)) / (12.0 * h * h);
        const Complex ly = (-f(0, 2 * h) + 16.0 * f(0, h) - 30.0 * c + 16.0 * f(0, -h) - f(0, -2 * h)) / (12.0 * h * h);
        worst = std::max(worst, std::abs(lx + ly + k2 * c));
    }
    return worst;
}

FieldBounds field_bounds(const WaveField &u) {
    const double R = u.config().R;
    std::vector<Vec2> pts;
    constexpr int rings = 8, spokes = 64;
    for (int i = 0; i < rings; ++i) {
        const double r = (R + 2.0) + (8.0 * R - (R + 2.0)) * double(i) / (rings - 1);
        for (int l = 0; l < spokes; ++l) pts.push_back(r * unit_from_angle(2.0 * pi * (double(l) + 0.5) / spokes));
    }
    const auto us = u.representation().scattered_batch(pts);
    FieldBounds b;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        b.E = std::max(b.E, std::abs(us[i] + u.incident().value(pts[i])));
        b.E1 = std::max(b.E1, std::abs(us[i]) * std::sqrt(norm(pts[i])));
    }
    return b;
}

}  // namespace polyscat
