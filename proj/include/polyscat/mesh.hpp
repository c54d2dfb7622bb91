#pragma once

#include <cstdint>
#include <vector>

#include "polyscat/scene.hpp"

namespace polyscat {

/// Kress sigmoidal grading on [0,1]: all derivatives below the exponent vanish at both ends.
double grading_map(double s, double p);
double grading_map_derivative(double s, double p);

struct BoundaryNode {
    Vec2 x;
    Vec2 normal;
    double speed = 0.0;   // |dx/dt|
    double weight = 0.0;  // trapezoid weight times speed
    double t = 0.0;       // periodic parameter in [0, 2 pi)
    std::uint32_t polygon = 0;
    std::uint32_t cell = 0;  // global cell index in the scatterer
};

/// Graded periodic parametrisation of every polygon with equispaced nodes in t.
///
/// Each polygon gets `nodes_per_polygon` nodes distributed over its edges in
/// proportion to length. Node j sits at t = 2 pi (j + 1/2) / n, so no node
/// coincides with a corner.
class BoundaryMesh {
public:
    BoundaryMesh() = default;
    BoundaryMesh(const Scatterer2D &s, int nodes_per_polygon, double grading);

    const std::vector<BoundaryNode> &nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }
    std::size_t polygon_count() const { return polys_.size(); }
    std::size_t first_node(std::size_t p) const { return polys_[p].first; }
    std::size_t node_count(std::size_t p) const { return polys_[p].n; }
    double grading() const { return grading_; }

    Vec2 position(std::size_t p, double t) const;
    Vec2 tangent(std::size_t p, double t) const;  // dx/dt
    Vec2 normal(std::size_t p, double t) const;
    /// Global cell index at parameter t.
    std::size_t cell_at(std::size_t p, double t) const;
    /// Parameters of the polygon corners, ascending in [0, 2 pi).
    std::vector<double> corner_parameters(std::size_t p) const;
    /// Largest node spacing (arc length) on polygon p.
    double max_spacing(std::size_t p) const { return polys_[p].max_weight; }
    const std::vector<Segment> &edges(std::size_t p) const { return polys_[p].edges; }

private:
    struct PolyInfo {
        std::size_t first = 0;
        std::size_t n = 0;
        std::vector<std::size_t> edge_offset;  // first node index of each edge (local)
        std::vector<std::size_t> edge_count;
        std::vector<Segment> edges;
        std::vector<std::size_t> cell_index;
        double max_weight = 0.0;
    };
    std::size_t edge_at(const PolyInfo &info, double t, double &sigma) const;

    std::vector<BoundaryNode> nodes_;
    std::vector<PolyInfo> polys_;
    double grading_ = 4.0;
};

}  // namespace polyscat
