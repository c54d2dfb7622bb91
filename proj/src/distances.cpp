// Exact Hausdorff distances between polygonal scatterers.
//
// The distance to a polygonal boundary is the lower envelope of "primitive"
// squared distances: to each vertex, |x - P|^2, and to each edge line,
// (n.x - c)^2. Along a straight edge of the other set every primitive is a
// quadratic in the edge parameter and every segment distance is convex, so the
// maximum of the envelope sits at an edge endpoint or where two primitives
// agree. Over a planar region the interior maxima are Voronoi vertices of the
// primitives, i.e. points equidistant to three of them.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

#include "polyscat/errors.hpp"
#include "polyscat/scene.hpp"

namespace polyscat {
namespace {

struct Primitive {
    bool is_point = true;
    Vec2 p;          // point primitive
    Vec2 n;          // unit normal of a line primitive
    double c = 0.0;  // line: n.x = c
};

std::vector<Primitive> primitives_of(const Scatterer2D &s) {
    std::vector<Primitive> out;
    for (const auto &poly : s.polygons())
        for (const auto &v : poly.vertices()) out.push_back({true, v, {}, 0.0});
    for (const auto &cell : s.cells()) {
        if (cell.segment.length() == 0.0) continue;
        out.push_back({false, {}, cell.normal, dot(cell.normal, cell.segment.a)});
    }
    return out;
}

/// Squared distance to a primitive restricted to the line x = a + t d: alpha t^2 + beta t + gamma.
struct Quadratic {
    double a2 = 0.0, a1 = 0.0, a0 = 0.0;
};

Quadratic along(const Primitive &pr, Vec2 a, Vec2 d) {
    if (pr.is_point) {
        const Vec2 r = a - pr.p;
        return {norm2(d), 2.0 * dot(r, d), norm2(r)};
    }
    const double s1 = dot(pr.n, d), s0 = dot(pr.n, a) - pr.c;
    return {s1 * s1, 2.0 * s0 * s1, s0 * s0};
}

/// Real roots of a2 t^2 + a1 t + a0 = 0 (a degenerate equation yields at most one root).
void real_roots(double a2, double a1, double a0, std::vector<double> &out) {
    const double scale = std::max({std::abs(a2), std::abs(a1), std::abs(a0)});
    if (scale == 0.0) return;
    if (std::abs(a2) <= 1e-14 * scale) {
        if (std::abs(a1) > 1e-14 * scale) out.push_back(-a0 / a1);
        return;
    }
    double disc = a1 * a1 - 4.0 * a2 * a0;
    if (disc < 0.0) {
        if (disc > -1e-12 * a1 * a1) disc = 0.0;
        else return;
    }
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (a1 + (a1 >= 0.0 ? sq : -sq));
    if (q != 0.0) {
        out.push_back(q / a2);
        out.push_back(a0 / q);
    } else {
        out.push_back(0.0);
    }
}

/// Candidate parameters in [0,1] along the segment a + t d.
std::vector<double> segment_candidates(const std::vector<Primitive> &prims, Vec2 a, Vec2 d) {
    std::vector<Quadratic> q;
    q.reserve(prims.size());
    for (const auto &pr : prims) q.push_back(along(pr, a, d));
    std::vector<double> ts{0.0, 1.0};
    std::vector<double> roots;
    for (std::size_t i = 0; i < q.size(); ++i) {
        for (std::size_t j = i + 1; j < q.size(); ++j) {
            roots.clear();
            real_roots(q[i].a2 - q[j].a2, q[i].a1 - q[j].a1, q[i].a0 - q[j].a0, roots);
            for (double t : roots)
                if (t > 0.0 && t < 1.0) ts.push_back(t);
        }
    }
    return ts;
}

struct Line {
    Vec2 point;
    Vec2 dir;  // unit
};

/// Bisector lines of two primitives of the same kind.
std::vector<Line> bisectors(const Primitive &u, const Primitive &v) {
    std::vector<Line> out;
    if (u.is_point && v.is_point) {
        const Vec2 d = v.p - u.p;
        if (norm(d) == 0.0) return out;
        out.push_back({0.5 * (u.p + v.p), normalized(perp(d))});
        return out;
    }
    // Lines n1.x - c1 = +-(n2.x - c2)  <=>  (n1 -+ n2).x = c1 -+ c2.
    for (double sgn : {1.0, -1.0}) {
        const Vec2 m = u.n - sgn * v.n;
        const double c = u.c - sgn * v.c;
        const double len = norm(m);
        if (len < 1e-12) continue;  // parallel lines: this branch is empty or everything
        const Vec2 nn = m / len;
        out.push_back({(c / len) * nn, perp(nn)});
    }
    return out;
}

/// Voronoi-vertex candidates: points equidistant to three primitives.
std::vector<Vec2> voronoi_candidates(const std::vector<Primitive> &prims) {
    std::vector<Vec2> out;
    std::vector<double> roots;
    const std::size_t m = prims.size();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            for (std::size_t k = j + 1; k < m; ++k) {
                std::array<const Primitive *, 3> tri{&prims[i], &prims[j], &prims[k]};
                // Pick a same-kind pair to take a bisector line; every triple has one.
                const Primitive *u = nullptr, *v = nullptr, *w = nullptr;
                if (tri[0]->is_point == tri[1]->is_point) { u = tri[0]; v = tri[1]; w = tri[2]; }
                else if (tri[0]->is_point == tri[2]->is_point) { u = tri[0]; v = tri[2]; w = tri[1]; }
                else { u = tri[1]; v = tri[2]; w = tri[0]; }
                for (const Line &bl : bisectors(*u, *v)) {
                    const Quadratic qu = along(*u, bl.point, bl.dir);
                    const Quadratic qw = along(*w, bl.point, bl.dir);
                    roots.clear();
                    real_roots(qu.a2 - qw.a2, qu.a1 - qw.a1, qu.a0 - qw.a0, roots);
                    for (double s : roots) out.push_back(bl.point + s * bl.dir);
                }
            }
        }
    }
    return out;
}

bool any_polygon(const Scatterer2D &s) { return !s.empty(); }

}  // namespace

double directed_boundary_hausdorff(const Scatterer2D &a, const Scatterer2D &b) {
    if (!any_polygon(a)) return 0.0;
    if (!any_polygon(b)) throw ParameterError("boundary Hausdorff distance to an empty scatterer is undefined");
    const auto prims = primitives_of(b);
    double best = 0.0;
    for (const auto &cell : a.cells()) {
        const Vec2 p0 = cell.segment.a, d = cell.segment.direction();
        for (double t : segment_candidates(prims, p0, d)) best = std::max(best, b.boundary_distance(p0 + t * d));
    }
    return best;
}

double directed_set_hausdorff(const Scatterer2D &a, const Scatterer2D &b) {
    if (!any_polygon(a)) return 0.0;
    if (!any_polygon(b)) throw ParameterError("set Hausdorff distance to an empty scatterer is undefined");
    const auto prims = primitives_of(b);
    double best = 0.0;
    for (const auto &cell : a.cells()) {
        const Vec2 p0 = cell.segment.a, d = cell.segment.direction();
        for (double t : segment_candidates(prims, p0, d)) best = std::max(best, b.distance(p0 + t * d));
    }
    for (const Vec2 &x : voronoi_candidates(prims)) {
        if (!std::isfinite(x.x) || !std::isfinite(x.y)) continue;
        if (!a.contains(x)) continue;
        best = std::max(best, b.distance(x));
    }
    return best;
}

double boundary_hausdorff(const Scatterer2D &a, const Scatterer2D &b) {
    if (a.empty() && b.empty()) return 0.0;
    return std::max(directed_boundary_hausdorff(a, b), directed_boundary_hausdorff(b, a));
}

double set_hausdorff(const Scatterer2D &a, const Scatterer2D &b) {
    if (a.empty() && b.empty()) return 0.0;
    return std::max(directed_set_hausdorff(a, b), directed_set_hausdorff(b, a));
}

double one_sided_distance(const Scatterer2D &a, const Scatterer2D &b, double resolution) {
    if (!(resolution > 0.0)) throw ParameterError("resolution must be positive");
    double best = 0.0;
    for (const auto &cell : a.cells()) {
        const double len = cell.segment.length();
        const auto n = static_cast<std::size_t>(std::ceil(len / resolution));
        for (std::size_t i = 0; i <= n; ++i) {
            const Vec2 x = cell.segment.at(n == 0 ? 0.0 : double(i) / double(n));
            if (b.contains(x)) continue;
            best = std::max(best, b.boundary_distance(x));
        }
    }
    return best;
}

DistanceTriple distance_triple(const Scatterer2D &a, const Scatterer2D &b, double resolution) {
    if (!(resolution > 0.0)) throw ParameterError("resolution must be positive");
    DistanceTriple out;
    if (a.empty() && b.empty()) return out;
    out.dhat = boundary_hausdorff(a, b);
    out.dtilde = set_hausdorff(a, b);
    out.d = std::max(one_sided_distance(a, b, resolution), one_sided_distance(b, a, resolution));
    out.sampling_error = resolution;
    return out;
}

}  // namespace polyscat
