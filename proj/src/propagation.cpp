#include "polyscat/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polyscat/errors.hpp"
#include "polyscat/io.hpp"

namespace polyscat {

namespace {

constexpr double golden_angle = 2.39996322972865332223;  // pi (3 - sqrt 5)

}  // namespace

// ---- three spheres ------------------------------------------------------------

std::vector<Vec2> ball_samples(Vec2 center, double radius, std::size_t n) {
    n = std::max<std::size_t>(n, 10000);
    const std::size_t ring = std::max<std::size_t>(256, static_cast<std::size_t>(4.0 * std::sqrt(double(n))));
    std::vector<Vec2> pts;
    pts.reserve(n + ring);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = radius * std::sqrt((i + 0.5) / double(n));
        pts.push_back(center + r * unit_from_angle(golden_angle * double(i)));
    }
    for (std::size_t i = 0; i < ring; ++i) pts.push_back(center + radius * unit_from_angle(2.0 * pi * i / ring));
    return pts;
}

SphereNorms sphere_norms(const FieldEvaluator &f, Vec2 center, double r1, double r, double r2, std::size_t samples) {
    if (!(0.0 < r1 && r1 < r && r < r2)) throw ParameterError("three spheres: need 0 < r1 < r < r2");
    auto sup = [&](double radius) {
        double m = 0.0;
        for (Vec2 p : ball_samples(center, radius, samples)) {
            if (!f.in_domain(p)) throw DomainError("three spheres: ball of radius " + std::to_string(radius) +
                                                   " leaves the field's domain");
            m = std::max(m, std::abs(f.value(p)));
        }
        return m;
    };
    SphereNorms n;
    n.r1 = r1;
    n.r = r;
    n.r2 = r2;
    n.samples = std::max<std::size_t>(samples, 10000);
    n.pitch = r2 * std::sqrt(pi / double(n.samples));
    // The balls are nested, so the sup over a larger ball dominates the smaller ones.
    n.M1 = sup(r1);
    n.M = std::max(sup(r), n.M1);
    n.M2 = std::max(sup(r2), n.M);
    return n;
}

namespace {

bool nondegenerate(const SphereNorms &n) { return n.M1 < n.M && n.M < n.M2; }

}  // namespace

double beta_fit(const SphereNorms &n) {
    if (!(n.M1 < n.M2) || !(n.M1 > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return std::log(n.M / n.M2) / std::log(n.M1 / n.M2);
}

double three_spheres_margin(double r, double r2) {
    const double s = 0.5 * (r + r2);
    return 1.0 / (1.0 - r / s);
}

ThreeSpheresCalibration calibrate_three_spheres(std::span<const SphereNorms> fleet) {
    ThreeSpheresCalibration cal;
    cal.fleet = fleet.size();
    double lo = 1.0, hi = 0.0;
    for (const SphereNorms &n : fleet) {
        if (!nondegenerate(n)) {
            ++cal.degenerate;
            continue;
        }
        const double b = beta_fit(n);
        lo = std::min(lo, b);
        hi = std::max(hi, b);
    }
    if (hi < lo) throw FitError("three spheres: calibration fleet has no non-degenerate member");
    cal.beta_low = lo;
    cal.beta_high = hi;
    double c = 1.0;
    for (const SphereNorms &n : fleet) {
        const double rhs = three_spheres_margin(n.r, n.r2) * std::pow(n.M2, 1.0 - lo) * std::pow(n.M1, lo);
        if (rhs > 0.0) c = std::max(c, n.M / rhs);
    }
    cal.C_fleet = c;
    return cal;
}

ThreeSpheresResult three_spheres_check(const SphereNorms &norms, const ThreeSpheresCalibration &cal) {
    ThreeSpheresResult r;
    r.norms = norms;
    r.degenerate = !nondegenerate(norms);
    r.beta_fit = beta_fit(norms);
    const double b = cal.beta_low;
    const double base = three_spheres_margin(norms.r, norms.r2) * std::pow(norms.M2, 1.0 - b) * std::pow(norms.M1, b);
    r.rhs = cal.C_fleet * base;
    r.C_fit = base > 0.0 ? norms.M / base : (norms.M > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    r.holds = norms.M <= r.rhs * (1.0 + 1e-12);
    return r;
}

ThreeSpheresResult three_spheres_check(const FieldEvaluator &f, Vec2 center, double r1, double r, double r2,
                                       const ThreeSpheresCalibration &cal, double cap) {
    if (r2 > cap) throw ParameterError("three spheres: outer radius exceeds the cap " + std::to_string(cap));
    return three_spheres_check(sphere_norms(f, center, r1, r, r2), cal);
}

// ---- ledger ---------------------------------------------------------------------

ExponentLedger ledger(std::span<const double> betas) {
    ExponentLedger l;
    l.beta.assign(betas.begin(), betas.end());
    double B = 0.0, G = 1.0, logG = 0.0;
    for (std::size_t n = 0; n < betas.size(); ++n) {
        const double b = betas[n];
        if (!(b > 0.0 && b < 1.0)) throw ParameterError("ledger: beta[" + std::to_string(n) + "] outside (0,1)");
        B = b * (1.0 + B);
        G *= b;
        logG += std::log(b);
        l.B.push_back(B);
        l.Gamma.push_back(G);
        l.log_Gamma.push_back(logG);
    }
    return l;
}

std::string ledger_csv(const ExponentLedger &l) {
    std::string out = "i,beta,B,Gamma\n";
    for (std::size_t i = 0; i < l.size(); ++i)
        out += std::to_string(i) + ',' + io::format_double(l.beta[i]) + ',' + io::format_double(l.B[i]) + ',' +
               io::format_double(l.Gamma[i]) + '\n';
    return out;
}

double SmallnessBounds::bound(std::size_t j) const { return std::exp(log_bound.at(j)); }

SmallnessBounds propagate_smallness(std::size_t balls, double eps, double E, double C, std::span<const double> betas) {
    if (balls == 0) throw ParameterError("propagate_smallness: empty chain");
    if (betas.size() + 1 != balls) throw ParameterError("propagate_smallness: need one beta per chain link");
    if (!(eps > 0.0 && E > 0.0 && C > 0.0)) throw ParameterError("propagate_smallness: eps, E, C must be positive");
    if (eps > E) throw ParameterError("propagate_smallness: eps exceeds E");
    const ExponentLedger l = ledger(betas);
    const double le = std::log(eps), lE = std::log(E), lC = std::log(C);
    SmallnessBounds out;
    out.log_bound.push_back(le);
    for (std::size_t j = 1; j < balls; ++j) {
        const double G = l.Gamma[j - 1];
        const double one_minus_G = -std::expm1(l.log_Gamma[j - 1]);
        out.log_bound.push_back((1.0 + l.B[j - 1]) * lC + one_minus_G * lE + G * le);
    }
    return out;
}

SmallnessBounds propagate_smallness(const BallChain &c, double eps, double E, double C, std::span<const double> betas) {
    return propagate_smallness(c.size(), eps, E, C, betas);
}

// ---- reflections and flatness ----------------------------------------------------

FieldEvaluator reflect_field(const WaveField &u, const HyperplaneLine &pi) {
    const HyperplaneLine line = HyperplaneLine::through(pi.point, pi.normal);
    FieldEvaluator f;
    f.value = [u, line](Vec2 x) { return u.eval(reflect(x, line)).value; };
    f.grad = [u, line](Vec2 x) {
        const CVec2 g = u.eval_grad(reflect(x, line)).value;
        const Complex gn = dot(g, line.normal);
        return CVec2{g.x - 2.0 * gn * line.normal.x, g.y - 2.0 * gn * line.normal.y};
    };
    f.in_domain = [u, line](Vec2 x) { return u.in_domain(reflect(x, line)); };
    return f;
}

Flatness flatness_indicator(const WaveField &u, const HyperplaneLine &pi, const ScatterConfig &cfg,
                            std::size_t intervals) {
    if (intervals == 0) throw ParameterError("flatness: need at least one interval");
    const HyperplaneLine line = HyperplaneLine::through(pi.point, pi.normal);
    const double r_in = 2.0 * cfg.R2 + 2.0, r_out = 2.0 * cfg.R2 + 3.0;
    const double p = line.signed_distance({0.0, 0.0});
    if (std::abs(p) > r_out) throw ParameterError("flatness: the line misses the annulus");
    const Vec2 foot = -p * line.normal;
    const Vec2 dir = line.direction();
    const double t_out = std::sqrt(r_out * r_out - p * p);
    const double t_in = std::abs(p) < r_in ? std::sqrt(r_in * r_in - p * p) : 0.0;

    std::vector<Vec2> pts;
    for (int side : {1, -1})
        for (std::size_t i = 0; i <= intervals; ++i) {
            const double t = t_in + (t_out - t_in) * double(i) / double(intervals);
            pts.push_back(foot + (side * t) * dir);
        }
    Flatness f;
    f.samples = pts.size();
    f.A = -1.0;
    for (Vec2 x : pts) {
        const double a = std::abs(dot(u.eval_grad(x).value, line.normal));
        if (a > f.A) {
            f.A = a;
            f.argmax = x;
        }
    }
    return f;
}

// ---- moduli -----------------------------------------------------------------------

double log_eta_from_log(double log_s) {
    if (!(log_s < -1.0)) throw ParameterError("eta: argument outside (0, 1/e)");
    return -std::sqrt(std::log(-log_s));
}

double eta(double s) {
    if (!(s > 0.0 && s < std::exp(-1.0))) throw ParameterError("eta: argument outside (0, 1/e)");
    return std::exp(log_eta_from_log(std::log(s)));
}

double eta1(double e0, double C1) {
    if (!(e0 > 0.0 && e0 < std::exp(-1.0))) throw ParameterError("eta1: argument outside (0, 1/e)");
    if (!(C1 > 0.0)) throw ParameterError("eta1: C1 must be positive");
    return std::exp(-C1 * std::sqrt(-std::log(e0)));
}

double stability_bound(double eps, double C, double R) {
    if (!(eps > 0.0 && eps <= 1.0 / (2.0 * std::exp(1.0))))
        throw ParameterError("stability_bound: eps outside (0, 1/(2e)]");
    if (!(C > 0.0 && R > 0.0)) throw ParameterError("stability_bound: C and R must be positive");
    return 2.0 * std::exp(1.0) * R * std::pow(eta(eps), C);
}

}  // namespace polyscat
