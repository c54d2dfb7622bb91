#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "polyscat/geometry.hpp"

namespace polyscat {

enum class BoundaryCondition { hard, soft };

std::string to_string(BoundaryCondition bc);
BoundaryCondition boundary_condition_from_string(const std::string &s);

/// Admissible-class constants: minimal cell size h, slope bound L, containing radius R.
struct ClassParams {
    double h = 0.25;
    double L = 4.0;
    double R = 1.0;
};

/// Simple closed polygon, stored counterclockwise.
class Polygon {
public:
    Polygon() = default;
    explicit Polygon(std::vector<Vec2> vertices);

    const std::vector<Vec2> &vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }
    const Vec2 &vertex(std::size_t i) const { return vertices_[i % vertices_.size()]; }
    Segment edge(std::size_t i) const { return {vertex(i), vertex(i + 1)}; }
    /// Outward unit normal of edge i.
    Vec2 edge_normal(std::size_t i) const;

    double signed_area() const;
    double perimeter() const;
    Vec2 centroid() const;

    /// Closed containment: boundary points count as inside.
    bool contains(Vec2 p) const;
    double boundary_distance(Vec2 p) const;

private:
    std::vector<Vec2> vertices_;
};

/// A cell is one polygon edge together with its outward normal.
struct Cell {
    Segment segment;
    Vec2 normal;
    std::size_t polygon = 0;
    std::size_t edge = 0;
};

class Scatterer2D {
public:
    Scatterer2D() = default;
    explicit Scatterer2D(std::vector<Polygon> polygons, BoundaryCondition bc = BoundaryCondition::hard,
                         ClassParams params = {});

    const std::vector<Polygon> &polygons() const { return polygons_; }
    const std::vector<Cell> &cells() const { return cells_; }
    BoundaryCondition bc() const { return bc_; }
    const ClassParams &class_params() const { return params_; }
    bool empty() const { return polygons_.empty(); }

    bool contains(Vec2 p) const;
    /// Distance to the boundary; +inf for the empty scatterer.
    double boundary_distance(Vec2 p) const;
    /// Distance to the set; zero inside.
    double distance(Vec2 p) const;

    struct Nearest {
        Vec2 point;
        std::size_t cell = 0;
        double distance = std::numeric_limits<double>::infinity();
    };
    Nearest nearest_boundary_point(Vec2 p) const;

    /// Largest vertex norm (0 when empty).
    double radius() const;
    std::size_t vertex_count() const;

    Scatterer2D with_bc(BoundaryCondition bc) const { return Scatterer2D(polygons_, bc, params_); }
    Scatterer2D with_params(ClassParams p) const { return Scatterer2D(polygons_, bc_, p); }

private:
    std::vector<Polygon> polygons_;
    std::vector<Cell> cells_;
    BoundaryCondition bc_ = BoundaryCondition::hard;
    ClassParams params_{};
};

/// Line Pi given by a point on it and its unit normal.
struct HyperplaneLine {
    Vec2 point;
    Vec2 normal{0.0, 1.0};

    static HyperplaneLine through(Vec2 point, Vec2 normal) { return {point, normalized(normal)}; }
    double signed_distance(Vec2 p) const { return dot(p - point, normal); }
    Vec2 direction() const { return perp(normal); }
};

// ---- class validation -------------------------------------------------------

struct Violation {
    std::string condition;  // e.g. "min_edge_length", "degenerate_vertex"
    std::string detail;
};

struct ClassReport {
    bool pass = true;
    double h_actual = std::numeric_limits<double>::infinity();
    double L_actual = 0.0;
    double R_actual = 0.0;
    std::vector<Violation> violations;

    bool has(const std::string &condition) const;
};

ClassReport validate_scatterer(const Scatterer2D &s, double h, double L, double R);
inline ClassReport validate_scatterer(const Scatterer2D &s) {
    return validate_scatterer(s, s.class_params().h, s.class_params().L, s.class_params().R);
}

// ---- metrics ----------------------------------------------------------------

/// d: one-sided boundary distance (sampled); dhat = d_H(boundaries); dtilde = d_H(sets).
struct DistanceTriple {
    double d = 0.0;
    double dhat = 0.0;
    double dtilde = 0.0;
    double sampling_error = 0.0;  // bound on the error of d
};

DistanceTriple distance_triple(const Scatterer2D &a, const Scatterer2D &b, double resolution);

/// Exact sup over the boundary of a of the distance to the boundary of b.
double directed_boundary_hausdorff(const Scatterer2D &a, const Scatterer2D &b);
/// Exact sup over the set a of the distance to the set b.
double directed_set_hausdorff(const Scatterer2D &a, const Scatterer2D &b);
double boundary_hausdorff(const Scatterer2D &a, const Scatterer2D &b);
double set_hausdorff(const Scatterer2D &a, const Scatterer2D &b);
/// Sampled sup over boundary points of a lying outside b of the distance to b.
double one_sided_distance(const Scatterer2D &a, const Scatterer2D &b, double resolution);

// ---- reflections and symmetry ----------------------------------------------

Vec2 reflect(Vec2 p, const HyperplaneLine &pi);
Vec2 reflect_direction(Vec2 v, const HyperplaneLine &pi);
Polygon reflect(const Polygon &poly, const HyperplaneLine &pi);
Scatterer2D reflect(const Scatterer2D &s, const HyperplaneLine &pi);

/// Lines parallel to v (normal orthogonal to v) that map s onto itself within tol.
std::vector<HyperplaneLine> symmetry_lines(const Scatterer2D &s, Vec2 v, double tol);

// ---- exterior connectedness -------------------------------------------------

struct ConnectednessProfile {
    struct Sample {
        double t = 0.0;
        double delta = 0.0;
    };
    std::vector<Sample> samples;
    double pitch = 0.0;
    double span = 0.0;
};

/// Single sample delta_est(t) on a grid of pitch <= t/64 within the span disc.
double exterior_connectedness(const Scatterer2D &s, double t, double span);
/// Profile over several t on one common grid (pitch <= min t / 64).
ConnectednessProfile connectedness_profile(const Scatterer2D &s, std::span<const double> ts, double span);

// ---- perturbations ------------------------------------------------------------

enum class PerturbMode { vertex_jitter, notch, bump };
std::string to_string(PerturbMode m);
PerturbMode perturb_mode_from_string(const std::string &s);

Scatterer2D perturb(const Scatterer2D &s, double magnitude, PerturbMode mode, std::uint64_t seed);

// ---- incident direction sets ------------------------------------------------

struct DirectionIndependence {
    double a0 = 0.0;
    bool spans = false;
};

/// a0 = min over unit nu of max_j |v_j . nu|.
DirectionIndependence direction_independence(std::span<const Vec2> directions);

// ---- common shapes ----------------------------------------------------------

Polygon regular_polygon(std::size_t n, double circumradius, Vec2 center = {}, double phase = 0.0);
Polygon axis_square(double side, Vec2 center = {});

}  // namespace polyscat
