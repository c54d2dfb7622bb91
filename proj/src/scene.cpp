#include "polyscat/scene.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "polyscat/errors.hpp"

namespace polyscat {

std::string to_string(BoundaryCondition bc) { return bc == BoundaryCondition::hard ? "hard" : "soft"; }

BoundaryCondition boundary_condition_from_string(const std::string &s) {
    if (s == "hard") return BoundaryCondition::hard;
    if (s == "soft") return BoundaryCondition::soft;
    throw ValidationError("bc: expected \"hard\" or \"soft\", got \"" + s + "\"");
}

// ---- Polygon ----------------------------------------------------------------

Polygon::Polygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() >= 3 && signed_area() < 0.0) std::reverse(vertices_.begin(), vertices_.end());
}

Vec2 Polygon::edge_normal(std::size_t i) const {
    const Vec2 d = edge(i).direction();
    return normalized(Vec2{d.y, -d.x});
}

double Polygon::signed_area() const {
    double a = 0.0;
    for (std::size_t i = 0; i < vertices_.size(); ++i) a += cross(vertex(i), vertex(i + 1));
    return 0.5 * a;
}

double Polygon::perimeter() const {
    double p = 0.0;
    for (std::size_t i = 0; i < vertices_.size(); ++i) p += edge(i).length();
    return p;
}

Vec2 Polygon::centroid() const {
    const double a = signed_area();
    Vec2 c{};
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
        const Vec2 p = vertex(i), q = vertex(i + 1);
        c += cross(p, q) * (p + q);
    }
    return c / (6.0 * a);
}

bool Polygon::contains(Vec2 p) const {
    const std::size_t n = vertices_.size();
    if (n < 3) return false;
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = vertices_[i], b = vertices_[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double xint = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < xint) inside = !inside;
        }
    }
    if (inside) return true;
    return boundary_distance(p) <= 1e-14 * (1.0 + norm(p));
}

double Polygon::boundary_distance(Vec2 p) const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vertices_.size(); ++i) d = std::min(d, point_segment_distance(p, edge(i)));
    return d;
}

// ---- Scatterer2D ------------------------------------------------------------

Scatterer2D::Scatterer2D(std::vector<Polygon> polygons, BoundaryCondition bc, ClassParams params)
    : polygons_(std::move(polygons)), bc_(bc), params_(params) {
    for (std::size_t p = 0; p < polygons_.size(); ++p) {
        const auto &poly = polygons_[p];
        for (std::size_t e = 0; e < poly.size(); ++e) {
            const Segment seg = poly.edge(e);
            const double len = seg.length();
            const Vec2 n = len > 0.0 ? Vec2{seg.direction().y / len, -seg.direction().x / len} : Vec2{};
            cells_.push_back({seg, n, p, e});
        }
    }
}

bool Scatterer2D::contains(Vec2 p) const {
    return std::any_of(polygons_.begin(), polygons_.end(), [&](const Polygon &poly) { return poly.contains(p); });
}

double Scatterer2D::boundary_distance(Vec2 p) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto &c : cells_) d = std::min(d, point_segment_distance(p, c.segment));
    return d;
}

double Scatterer2D::distance(Vec2 p) const { return contains(p) ? 0.0 : boundary_distance(p); }

Scatterer2D::Nearest Scatterer2D::nearest_boundary_point(Vec2 p) const {
    Nearest best;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        const Vec2 q = cells_[i].segment.at(closest_parameter(p, cells_[i].segment));
        const double d = norm(p - q);
        if (d < best.distance) best = {q, i, d};
    }
    return best;
}

double Scatterer2D::radius() const {
    double r = 0.0;
    for (const auto &poly : polygons_)
        for (const auto &v : poly.vertices()) r = std::max(r, norm(v));
    return r;
}

std::size_t Scatterer2D::vertex_count() const {
    std::size_t n = 0;
    for (const auto &poly : polygons_) n += poly.size();
    return n;
}

// ---- validation -----------------------------------------------------------------

bool ClassReport::has(const std::string &condition) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const Violation &v) { return v.condition == condition; });
}

namespace {

std::string where(std::size_t poly, std::size_t idx) {
    std::ostringstream os;
    os << "polygon " << poly << ", vertex " << idx;
    return os.str();
}

}  // namespace

ClassReport validate_scatterer(const Scatterer2D &s, double h, double L, double R) {
    ClassReport rep;
    auto fail = [&](std::string cond, std::string detail) {
        rep.pass = false;
        rep.violations.push_back({std::move(cond), std::move(detail)});
    };

    const auto &polys = s.polygons();
    bool structurally_ok = true;
    for (std::size_t p = 0; p < polys.size(); ++p) {
        const auto &poly = polys[p];
        const std::size_t n = poly.size();
        if (n < 3) {
            fail("vertex_count", "polygon " + std::to_string(p) + " has fewer than 3 vertices");
            structurally_ok = false;
            continue;
        }
        const double scale = std::max(1.0, s.radius());
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 ein = poly.vertex(i) - poly.vertex(i + n - 1);
            const Vec2 eout = poly.vertex(i + 1) - poly.vertex(i);
            const double lin = norm(ein), lout = norm(eout);
            rep.h_actual = std::min(rep.h_actual, lout);
            rep.R_actual = std::max(rep.R_actual, norm(poly.vertex(i)));
            if (lin <= 1e-12 * scale || lout <= 1e-12 * scale) {
                fail("degenerate_vertex", where(p, i) + ": repeated vertex");
                structurally_ok = false;
                continue;
            }
            const double turn = std::atan2(cross(ein, eout), dot(ein, eout));
            if (std::abs(turn) < 1e-9) {
                fail("degenerate_vertex", where(p, i) + ": collinear with its neighbours");
                structurally_ok = false;
                continue;
            }
            if (pi - std::abs(turn) < 1e-9) {
                fail("degenerate_vertex", where(p, i) + ": zero interior angle (spike)");
                structurally_ok = false;
                continue;
            }
            // Locally the boundary is a graph over the line orthogonal to the angle
            // bisector; the best achievable slope there is |tan(turn/2)|.
            rep.L_actual = std::max(rep.L_actual, std::abs(std::tan(0.5 * turn)));
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
                if (adjacent) continue;
                const double dij = segment_segment_distance(poly.edge(i), poly.edge(j));
                if (dij == 0.0) {
                    fail("not_simple", "polygon " + std::to_string(p) + ": edges " + std::to_string(i) + " and " +
                                           std::to_string(j) + " intersect");
                    structurally_ok = false;
                } else if (dij < 0.5 * h) {
                    fail("local_graph", "polygon " + std::to_string(p) + ": edges " + std::to_string(i) + " and " +
                                            std::to_string(j) + " are closer than h/2");
                }
            }
        }
    }

    for (std::size_t p = 0; p < polys.size(); ++p) {
        for (std::size_t q = p + 1; q < polys.size(); ++q) {
            if (polys[p].size() < 3 || polys[q].size() < 3) continue;
            double dmin = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < polys[p].size(); ++i)
                for (std::size_t j = 0; j < polys[q].size(); ++j)
                    dmin = std::min(dmin, segment_segment_distance(polys[p].edge(i), polys[q].edge(j)));
            if (dmin == 0.0) {
                fail("overlap", "polygons " + std::to_string(p) + " and " + std::to_string(q) + " touch or cross");
            } else if (polys[p].contains(polys[q].vertex(0)) || polys[q].contains(polys[p].vertex(0))) {
                fail("overlap", "polygons " + std::to_string(p) + " and " + std::to_string(q) + " are nested");
                fail("exterior_connected", "complement has a bounded component inside polygon " +
                                               std::to_string(polys[p].contains(polys[q].vertex(0)) ? p : q));
            }
        }
    }

    if (structurally_ok && !polys.empty()) {
        if (rep.h_actual < h) {
            std::ostringstream os;
            os << "shortest edge " << rep.h_actual << " < h = " << h;
            fail("min_edge_length", os.str());
        }
        if (rep.L_actual > L) {
            std::ostringstream os;
            os << "vertex slope " << rep.L_actual << " > L = " << L;
            fail("lipschitz", os.str());
        }
    }
    if (rep.R_actual > R) {
        std::ostringstream os;
        os << "vertex at radius " << rep.R_actual << " > R = " << R;
        fail("radius", os.str());
    }
    if (polys.empty()) rep.h_actual = 0.0;
    return rep;
}

// ---- reflections ------------------------------------------------------------------

Vec2 reflect(Vec2 p, const HyperplaneLine &pi) { return p - 2.0 * pi.signed_distance(p) * pi.normal; }

Vec2 reflect_direction(Vec2 v, const HyperplaneLine &pi) { return v - 2.0 * dot(v, pi.normal) * pi.normal; }

Polygon reflect(const Polygon &poly, const HyperplaneLine &pi) {
    std::vector<Vec2> v;
    v.reserve(poly.size());
    for (const auto &p : poly.vertices()) v.push_back(reflect(p, pi));
    // Mirroring flips orientation; the constructor reverses back to counterclockwise.
    return Polygon(std::move(v));
}

Scatterer2D reflect(const Scatterer2D &s, const HyperplaneLine &pi) {
    std::vector<Polygon> out;
    out.reserve(s.polygons().size());
    for (const auto &poly : s.polygons()) out.push_back(reflect(poly, pi));
    return Scatterer2D(std::move(out), s.bc(), s.class_params());
}

// ---- shapes ------------------------------------------------------------------------

Polygon regular_polygon(std::size_t n, double circumradius, Vec2 center, double phase) {
    std::vector<Vec2> v;
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        v.push_back(center + circumradius * unit_from_angle(phase + 2.0 * pi * double(i) / double(n)));
    return Polygon(std::move(v));
}

Polygon axis_square(double side, Vec2 center) {
    const double h = 0.5 * side;
    return Polygon({center + Vec2{-h, -h}, center + Vec2{h, -h}, center + Vec2{h, h}, center + Vec2{-h, h}});
}

// ---- direction sets ------------------------------------------------------------------

DirectionIndependence direction_independence(std::span<const Vec2> dirs) {
    DirectionIndependence out;
    if (dirs.empty()) return out;
    // max_j |v_j . nu| is a maximum of |cos| humps over the circle; its minimum sits
    // where nu is orthogonal to some v_j or where two humps cross, i.e. nu is
    // orthogonal to v_i +- v_j. The candidate set is finite.
    std::vector<Vec2> candidates;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        candidates.push_back(perp(dirs[i]));
        for (std::size_t j = i + 1; j < dirs.size(); ++j) {
            for (double sgn : {1.0, -1.0}) {
                const Vec2 w = dirs[i] + sgn * dirs[j];
                if (norm(w) > 1e-14) candidates.push_back(perp(normalized(w)));
            }
        }
    }
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2 &c : candidates) {
        const Vec2 nu = normalized(c);
        double m = 0.0;
        for (const Vec2 &v : dirs) m = std::max(m, std::abs(dot(v, nu)));
        best = std::min(best, m);
    }
    out.a0 = best < 1e-12 ? 0.0 : best;
    out.spans = out.a0 > 0.0;
    return out;
}

}  // namespace polyscat
