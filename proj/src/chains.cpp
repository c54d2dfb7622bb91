#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "polyscat/errors.hpp"
#include "polyscat/propagation.hpp"

namespace polyscat {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
// Construction keeps this much relative headroom over the clearances it must certify.
constexpr double headroom = 1.0 + 1e-6;
constexpr double check_tol = 1e-12;

/// Union of the scatterer and the extra floors, as seen by the chain tools.
class Obstacles {
public:
    Obstacles(const Scatterer2D &s, std::span<const Polygon> floors) {
        for (const Polygon &p : s.polygons()) polys_.push_back(&p);
        for (const Polygon &p : floors) polys_.push_back(&p);
    }

    const std::vector<const Polygon *> &polygons() const { return polys_; }

    bool contains(Vec2 p) const {
        return std::any_of(polys_.begin(), polys_.end(), [&](const Polygon *q) { return q->contains(p); });
    }

    /// Distance to the union; zero inside.
    double clearance(Vec2 p) const {
        double best = inf;
        for (const Polygon *q : polys_) {
            if (q->contains(p)) return 0.0;
            best = std::min(best, q->boundary_distance(p));
        }
        return best;
    }

    double segment_clearance(Vec2 a, Vec2 b) const {
        double best = inf;
        const Segment s{a, b};
        for (const Polygon *q : polys_) {
            if (q->contains(a) || q->contains(b)) return 0.0;
            for (std::size_t e = 0; e < q->size(); ++e) best = std::min(best, segment_segment_distance(s, q->edge(e)));
        }
        return best;
    }

    Vec2 nearest_point(Vec2 p) const {
        Vec2 best = p;
        double dist = inf;
        for (const Polygon *q : polys_)
            for (std::size_t e = 0; e < q->size(); ++e) {
                const Segment s = q->edge(e);
                const Vec2 c = s.at(closest_parameter(p, s));
                const double dc = norm(p - c);
                if (dc < dist) {
                    dist = dc;
                    best = c;
                }
            }
        return best;
    }

private:
    std::vector<const Polygon *> polys_;
};

std::string fmt_point(Vec2 p) {
    std::ostringstream os;
    os.precision(6);
    os << '(' << p.x << ", " << p.y << ')';
    return os.str();
}

void check_constants(const ChainConstants &a) {
    if (!(0.0 < a.a1 && a.a1 < a.a2 && a.a2 < a.a3 && a.a3 < 1.0 && 1.0 < a.a4))
        throw ParameterError("chain constants must satisfy 0 < a1 < a2 < a3 < 1 < a4");
}

/// Candidate waypoints on small arcs around every convex vertex, outside the inflated obstacles.
std::vector<Vec2> arc_waypoints(const Obstacles &obs, double clearance) {
    const double r = 1.1 * clearance;
    const double max_step = pi / 12.0;
    std::vector<Vec2> pts;
    for (const Polygon *q : obs.polygons()) {
        for (std::size_t i = 0; i < q->size(); ++i) {
            const Vec2 n_in = q->edge_normal(i + q->size() - 1);
            const Vec2 n_out = q->edge_normal(i);
            const double turn = std::atan2(cross(n_in, n_out), dot(n_in, n_out));
            if (turn <= 0.0) continue;  // reflex vertex, never on a shortest path
            const double phi0 = std::atan2(n_in.y, n_in.x);
            const int steps = std::max(1, static_cast<int>(std::ceil(turn / max_step)));
            for (int m = 0; m <= steps; ++m) {
                const Vec2 p = q->vertex(i) + r * unit_from_angle(phi0 + turn * m / steps);
                if (obs.clearance(p) >= clearance * 1.05) pts.push_back(p);
            }
        }
    }
    return pts;
}

/// Shortest polyline from a to b whose every segment keeps `clearance` from the obstacles.
std::vector<Vec2> route(const Obstacles &obs, Vec2 a, Vec2 b, double clearance) {
    if (obs.segment_clearance(a, b) >= clearance) return {a, b};
    std::vector<Vec2> nodes{a, b};
    for (Vec2 p : arc_waypoints(obs, clearance)) nodes.push_back(p);
    const std::size_t n = nodes.size();

    std::vector<double> dist(n, inf);
    std::vector<std::size_t> prev(n, n);
    std::vector<bool> done(n, false);
    dist[0] = 0.0;
    // Dense Dijkstra; visibility is tested lazily on relaxation.
    for (std::size_t iter = 0; iter < n; ++iter) {
        std::size_t u = n;
        for (std::size_t i = 0; i < n; ++i)
            if (!done[i] && dist[i] < inf && (u == n || dist[i] < dist[u])) u = i;
        if (u == n || u == 1) break;
        done[u] = true;
        for (std::size_t v = 0; v < n; ++v) {
            if (done[v]) continue;
            const double w = norm(nodes[v] - nodes[u]);
            if (dist[u] + w >= dist[v]) continue;
            if (obs.segment_clearance(nodes[u], nodes[v]) < clearance) continue;
            dist[v] = dist[u] + w;
            prev[v] = u;
        }
    }
    if (dist[1] == inf) {
        // Name the tightest spot on the direct route as the pinch point.
        Vec2 pinch = a;
        double worst = inf;
        for (int i = 0; i <= 2000; ++i) {
            const Vec2 p = a + (i / 2000.0) * (b - a);
            const double c = obs.clearance(p);
            if (c < worst) {
                worst = c;
                pinch = p;
            }
        }
        throw RoutingError("no exterior path with clearance " + std::to_string(clearance) + " from " + fmt_point(a) +
                           " to " + fmt_point(b) + "; pinch point near " + fmt_point(pinch) + " (clearance " +
                           std::to_string(worst) + ")");
    }
    std::vector<Vec2> path;
    for (std::size_t v = 1; v != n; v = prev[v]) path.push_back(nodes[v]);
    std::reverse(path.begin(), path.end());
    return path;
}

}  // namespace

ChainCheck chain_is_regular(const BallChain &c, const Scatterer2D &s, std::span<const Polygon> floors) {
    if (c.empty()) throw ParameterError("chain_is_regular: empty chain");
    const Obstacles obs(s, floors);
    const ChainConstants &a = c.a;
    auto fail = [](std::size_t i, int clause, std::string detail) {
        return ChainCheck{false, i, clause, std::move(detail)};
    };
    const std::size_t n = c.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Ball &b = c.balls[i];
        if (!(b.rho > 0.0)) return fail(i, 2, "non-positive radius");
        const double need = a.a4 * b.rho;
        const double have = obs.clearance(b.z);
        if (have < need * (1.0 - check_tol))
            return fail(i, 1, "clearance " + std::to_string(have) + " below a4*rho = " + std::to_string(need));
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Ball &b = c.balls[i];
        if (i > 0) {
            const Ball &p = c.balls[i - 1];
            if (b.rho > p.rho * (1.0 + check_tol)) return fail(i, 2, "radius exceeds its predecessor");
            if (norm(b.z - p.z) + a.a1 * b.rho > a.a2 * p.rho * (1.0 + check_tol))
                return fail(i, 2, "B_{a1 rho_i}(z_i) not inside B_{a2 rho_{i-1}}(z_{i-1})");
        }
        if (i + 1 < n) {
            const Ball &q = c.balls[i + 1];
            if (norm(b.z - q.z) + a.a1 * b.rho > a.a3 * q.rho * (1.0 + check_tol))
                return fail(i, 2, "B_{a1 rho_i}(z_i) not inside B_{a3 rho_{i+1}}(z_{i+1})");
        }
    }
    return {};
}

ChainBuild build_chain(const Scatterer2D &s, Vec2 x0, Vec2 x1, double d, const ChainConstants &a, double rho0,
                       std::span<const Polygon> floors) {
    check_constants(a);
    if (!(rho0 > 0.0)) throw ParameterError("build_chain: rho0 must be positive");
    if (!(d > 0.0)) throw ParameterError("build_chain: d must be positive");
    const Obstacles obs(s, floors);

    const double corridor_clearance = a.a4 * rho0 * headroom;
    if (obs.clearance(x0) < std::max(16.0, a.a4 * headroom) * rho0)
        throw ParameterError("build_chain: x0 is closer than 16*rho0 to the obstacles");
    const double d1 = obs.clearance(x1);
    if (!(d1 > 0.0)) throw ParameterError("build_chain: x1 is not in the exterior");

    ChainBuild out;
    out.rho0 = rho0;
    out.chain.a = a;

    // Tail geometry: centers y1 + t e with radius cone * t, t from T = rho0/cone down to d.
    Vec2 top = x1;
    std::vector<Ball> tail;
    double q_max = 1.0;
    if (d1 < corridor_clearance) {
        if (std::abs(d1 - d) > 1e-9 * std::max(1.0, d))
            throw ParameterError("build_chain: d = " + std::to_string(d) + " differs from dist(x1, obstacles) = " +
                                 std::to_string(d1));
        const Vec2 y1 = obs.nearest_point(x1);
        const Vec2 e = (x1 - y1) / d1;
        double cone = 0.99 / (a.a4 * headroom);
        for (int iter = 0;; ++iter) {
            if (iter > 200 || cone < 1e-9)
                throw RoutingError("no cone tail reaches x1 = " + fmt_point(x1) + "; pinch point near " + fmt_point(y1));
            q_max = std::min((1.0 - a.a1 * cone) / (1.0 - a.a2 * cone), (1.0 + a.a3 * cone) / (1.0 + a.a1 * cone));
            const double T = rho0 / cone;
            const int M = std::max(1, static_cast<int>(std::ceil(std::log(T / d1) / std::log(q_max) - 1e-12)));
            const double q = std::pow(T / d1, 1.0 / M);
            tail.clear();
            double worst = inf;
            for (int m = M; m >= 0; --m) {
                const double t = m == M ? T : d1 * std::pow(q, m);
                const Vec2 z = m == 0 ? x1 : y1 + t * e;
                const double r = m == M ? rho0 : cone * t;
                tail.push_back({z, r});
                worst = std::min(worst, obs.clearance(z) / (a.a4 * headroom * t));
            }
            if (worst >= cone) {
                out.cone = cone;
                out.b = 1.0 / q;
                break;
            }
            cone = std::min(0.9 * cone, worst);
        }
        top = tail.front().z;
    }

    // Corridor at constant radius along the shortest clear route.
    out.route = route(obs, x0, top, corridor_clearance);
    const double step = std::min(0.25, 0.9 * std::min(a.a2 - a.a1, a.a3 - a.a1)) * rho0;
    out.chain.balls.push_back({x0, rho0});
    for (std::size_t k = 1; k < out.route.size(); ++k) {
        const Vec2 p = out.route[k - 1], q = out.route[k];
        const int n = std::max(1, static_cast<int>(std::ceil(norm(q - p) / step - 1e-9)));
        for (int i = 1; i <= n; ++i) out.chain.balls.push_back({i == n ? q : p + (double(i) / n) * (q - p), rho0});
    }
    out.corridor_balls = out.chain.size();
    for (std::size_t m = 1; m < tail.size(); ++m) out.chain.balls.push_back(tail[m]);
    out.tail_balls = out.chain.size() - out.corridor_balls;
    out.s0 = out.chain.balls.back().rho / d;

    const double R = std::max(s.class_params().R, s.radius());
    const double n0 = double(out.chain.size() - 1);
    if (out.tail_balls > 0) {
        out.kappa = 1.0 / std::log(q_max);
        const double T = rho0 / out.cone;
        out.kappa_prime = double(out.corridor_balls) + out.kappa * std::log(T / (2.0 * std::exp(1.0) * R));
    } else {
        out.kappa_prime = n0;
    }

    if (const ChainCheck c = chain_is_regular(out.chain, s, floors); !c)
        throw RoutingError("constructed chain fails clause (" + std::string(c.clause == 1 ? "i" : "ii") +
                           ") at ball " + std::to_string(c.index) + ": " + c.detail);
    return out;
}

nlohmann::json chain_to_json(const BallChain &c) {
    nlohmann::json j = nlohmann::json::array();
    for (const Ball &b : c.balls) j.push_back({{"z", {b.z.x, b.z.y}}, {"rho", b.rho}});
    return j;
}

BallChain chain_from_json(const nlohmann::json &j, const ChainConstants &a) {
    if (!j.is_array()) throw ValidationError("chain: expected an array of {z, rho}");
    BallChain c;
    c.a = a;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string field = "chain[" + std::to_string(i) + "]";
        const auto &e = j[i];
        if (!e.is_object() || !e.contains("z") || !e.contains("rho"))
            throw ValidationError(field + ": expected {z, rho}");
        const auto &z = e.at("z");
        if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number())
            throw ValidationError(field + ".z: expected [x, y]");
        if (!e.at("rho").is_number()) throw ValidationError(field + ".rho: expected a number");
        c.balls.push_back({{z[0].get<double>(), z[1].get<double>()}, e.at("rho").get<double>()});
    }
    return c;
}

}  // namespace polyscat
