#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <unistd.h>
#include <string>
#include <limits>
#include <vector>

#include "polyscat/config.hpp"
#include "polyscat/scene.hpp"

namespace polyscat::test {

/// Star-shaped polygon with n vertices at radii in [r_lo, r_hi] about c, angles jittered.
inline Polygon random_star(std::mt19937_64 &g, std::size_t n, double r_lo, double r_hi, Vec2 c = {}) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<Vec2> v;
    const double phase = 2.0 * pi * U(g);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = phase + 2.0 * pi * (double(i) + 0.3 * (U(g) - 0.5)) / double(n);
        const double r = r_lo + (r_hi - r_lo) * U(g);
        v.push_back(c + r * unit_from_angle(a));
    }
    return Polygon(std::move(v));
}

/// Default configuration with two orthogonal incident directions.
inline ScatterConfig two_direction_config() {
    ScatterConfig cfg;
    cfg.directions = {{1.0, 0.0}, {0.0, 1.0}};
    return cfg;
}


// ---- independent distance oracles ------------------------------------------------
// These use only raw vertex lists and textbook geometry, never the library's own
// distance code.

inline bool oracle_inside(const Scatterer2D &s, Vec2 p) {
    for (const Polygon &poly : s.polygons()) {
        const auto &v = poly.vertices();
        bool in = false;
        for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
            if ((v[i].y > p.y) != (v[j].y > p.y) &&
                p.x < (v[j].x - v[i].x) * (p.y - v[i].y) / (v[j].y - v[i].y) + v[i].x)
                in = !in;
        }
        if (in) return true;
    }
    return false;
}

inline double oracle_boundary_distance(const Scatterer2D &s, Vec2 p) {
    double best = std::numeric_limits<double>::infinity();
    for (const Polygon &poly : s.polygons())
        for (std::size_t i = 0; i < poly.size(); ++i) best = std::min(best, point_segment_distance(p, poly.edge(i)));
    return best;
}

inline double oracle_set_distance(const Scatterer2D &s, Vec2 p) {
    return oracle_inside(s, p) ? 0.0 : oracle_boundary_distance(s, p);
}

/// Boundary points of s at arc-length pitch <= h, corners included.
inline std::vector<Vec2> oracle_boundary_samples(const Scatterer2D &s, double h) {
    std::vector<Vec2> out;
    for (const Polygon &poly : s.polygons())
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const Segment e = poly.edge(i);
            const auto n = std::size_t(std::ceil(e.length() / h));
            for (std::size_t m = 0; m < n; ++m) out.push_back(e.at(double(m) / double(n)));
        }
    return out;
}

/// Dense-sampling sup over the boundary of a of the distance to the boundary of b.
/// Underestimates the true value by at most pitch / 2.
inline double oracle_directed_boundary(const Scatterer2D &a, const Scatterer2D &b, double pitch) {
    double best = 0.0;
    for (Vec2 p : oracle_boundary_samples(a, pitch)) best = std::max(best, oracle_boundary_distance(b, p));
    return best;
}

/// Sampled one-sided distance: boundary points of a outside b, distance to the set b.
inline double oracle_one_sided(const Scatterer2D &a, const Scatterer2D &b, double pitch) {
    double best = 0.0;
    for (Vec2 p : oracle_boundary_samples(a, pitch))
        if (!oracle_inside(b, p)) best = std::max(best, oracle_boundary_distance(b, p));
    return best;
}

/// sup over the set a of dist(., b) to within tol: boundary sampling plus a
/// branch-and-bound over interior squares using that dist(., b) is 1-Lipschitz.
inline double oracle_directed_set(const Scatterer2D &a, const Scatterer2D &b, double tol) {
    double best = 0.0;
    for (Vec2 p : oracle_boundary_samples(a, 0.25 * tol)) best = std::max(best, oracle_set_distance(b, p));
    double lo_x = 1e300, lo_y = 1e300, hi_x = -1e300, hi_y = -1e300;
    for (const Polygon &poly : a.polygons())
        for (Vec2 v : poly.vertices()) {
            lo_x = std::min(lo_x, v.x), lo_y = std::min(lo_y, v.y);
            hi_x = std::max(hi_x, v.x), hi_y = std::max(hi_y, v.y);
        }
    struct Box {
        Vec2 c;
        double half;
    };
    std::vector<Box> stack{{{0.5 * (lo_x + hi_x), 0.5 * (lo_y + hi_y)}, 0.5 * std::max(hi_x - lo_x, hi_y - lo_y)}};
    while (!stack.empty()) {
        const Box box = stack.back();
        stack.pop_back();
        const double diag = box.half * std::sqrt(2.0);
        // Boxes touching the boundary of a are covered by the boundary samples
        // only at their boundary points; keep splitting them like any other box.
        const bool c_in = oracle_inside(a, box.c);
        const double to_bdry = oracle_boundary_distance(a, box.c);
        if (!c_in && to_bdry > diag) continue;  // box entirely outside a
        if (c_in) best = std::max(best, oracle_set_distance(b, box.c));
        const double upper = oracle_set_distance(b, box.c) + diag;
        if (upper <= best + tol) continue;
        const double h = 0.5 * box.half;
        for (double sx : {-h, h})
            for (double sy : {-h, h}) stack.push_back({{box.c.x + sx, box.c.y + sy}, h});
    }
    return best;
}

/// Unique scratch directory below the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string &tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("polyscat-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path &path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace polyscat::test
