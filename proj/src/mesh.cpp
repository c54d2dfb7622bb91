#include "polyscat/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "polyscat/errors.hpp"

namespace polyscat {

namespace {

double sigmoid_v(double s, double p) {
    const double u = 1.0 - 2.0 * s;
    return (1.0 / p - 0.5) * u * u * u + (2.0 * s - 1.0) / p + 0.5;
}

double sigmoid_v_derivative(double s, double p) {
    const double u = 1.0 - 2.0 * s;
    return -6.0 * (1.0 / p - 0.5) * u * u + 2.0 / p;
}

/// Largest-remainder split of n nodes over edges by length, at least one per edge.
std::vector<std::size_t> allocate(const Polygon &poly, std::size_t n) {
    const std::size_t m = poly.size();
    const double perim = poly.perimeter();
    std::vector<std::size_t> count(m, 1);
    std::size_t left = n - m;
    std::vector<double> share(m);
    for (std::size_t e = 0; e < m; ++e) share[e] = double(n) * poly.edge(e).length() / perim - 1.0;
    std::vector<double> rem(m);
    for (std::size_t e = 0; e < m; ++e) {
        const double whole = std::floor(std::max(0.0, share[e]));
        const auto add = std::min<std::size_t>(left, std::size_t(whole));
        count[e] += add;
        left -= add;
        rem[e] = share[e] - whole;
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t i = 0; left > 0; i = (i + 1) % m, --left) ++count[order[i]];
    return count;
}

double wrap(double t) {
    t = std::fmod(t, 2.0 * pi);
    return t < 0.0 ? t + 2.0 * pi : t;
}

}  // namespace

double grading_map(double s, double p) {
    const double v = sigmoid_v(s, p);
    const double a = std::pow(v, p), b = std::pow(1.0 - v, p);
    return a / (a + b);
}

double grading_map_derivative(double s, double p) {
    const double v = sigmoid_v(s, p);
    const double a = std::pow(v, p), b = std::pow(1.0 - v, p);
    const double den = a + b;
    return p * std::pow(v, p - 1.0) * std::pow(1.0 - v, p - 1.0) * sigmoid_v_derivative(s, p) / (den * den);
}

BoundaryMesh::BoundaryMesh(const Scatterer2D &s, int nodes_per_polygon, double grading) : grading_(grading) {
    if (nodes_per_polygon < 4 || nodes_per_polygon % 2 != 0)
        throw ParameterError("nodes per polygon must be even and at least 4");
    if (!(grading >= 2.0)) throw ParameterError("grading exponent must be at least 2");
    const auto n = std::size_t(nodes_per_polygon);
    std::size_t cell_base = 0;
    for (std::size_t p = 0; p < s.polygons().size(); ++p) {
        const Polygon &poly = s.polygons()[p];
        if (n < poly.size())
            throw ParameterError("polygon " + std::to_string(p) + " has more edges than quadrature nodes");
        PolyInfo info;
        info.first = nodes_.size();
        info.n = n;
        info.edge_count = allocate(poly, n);
        std::size_t off = 0;
        for (std::size_t e = 0; e < poly.size(); ++e) {
            info.edge_offset.push_back(off);
            off += info.edge_count[e];
            info.edges.push_back(poly.edge(e));
            info.cell_index.push_back(cell_base + e);
        }
        const double dt = 2.0 * pi / double(n);
        for (std::size_t e = 0; e < poly.size(); ++e) {
            const Segment &seg = info.edges[e];
            const double ne = double(info.edge_count[e]);
            const Vec2 normal = poly.edge_normal(e);
            for (std::size_t j = 0; j < info.edge_count[e]; ++j) {
                const double sigma = (double(j) + 0.5) / ne;
                BoundaryNode node;
                node.x = seg.a + grading_map(sigma, grading) * seg.direction();
                node.speed = grading_map_derivative(sigma, grading) * (double(n) / (2.0 * pi * ne)) * seg.length();
                node.weight = dt * node.speed;
                node.normal = normal;
                node.t = dt * (double(info.edge_offset[e] + j) + 0.5);
                node.polygon = std::uint32_t(p);
                node.cell = std::uint32_t(cell_base + e);
                info.max_weight = std::max(info.max_weight, node.weight);
                nodes_.push_back(node);
            }
        }
        cell_base += poly.size();
        polys_.push_back(std::move(info));
    }
}

std::size_t BoundaryMesh::edge_at(const PolyInfo &info, double t, double &sigma) const {
    const double u = wrap(t) * double(info.n) / (2.0 * pi);
    std::size_t e = info.edges.size() - 1;
    for (std::size_t i = 1; i < info.edge_offset.size(); ++i)
        if (u < double(info.edge_offset[i])) {
            e = i - 1;
            break;
        }
    sigma = std::clamp((u - double(info.edge_offset[e])) / double(info.edge_count[e]), 0.0, 1.0);
    return e;
}

Vec2 BoundaryMesh::position(std::size_t p, double t) const {
    double sigma = 0.0;
    const PolyInfo &info = polys_[p];
    const Segment &seg = info.edges[edge_at(info, t, sigma)];
    return seg.a + grading_map(sigma, grading_) * seg.direction();
}

Vec2 BoundaryMesh::tangent(std::size_t p, double t) const {
    double sigma = 0.0;
    const PolyInfo &info = polys_[p];
    const std::size_t e = edge_at(info, t, sigma);
    const double scale = double(info.n) / (2.0 * pi * double(info.edge_count[e]));
    return grading_map_derivative(sigma, grading_) * scale * info.edges[e].direction();
}

Vec2 BoundaryMesh::normal(std::size_t p, double t) const {
    double sigma = 0.0;
    const PolyInfo &info = polys_[p];
    const Vec2 d = info.edges[edge_at(info, t, sigma)].direction();
    return normalized(Vec2{d.y, -d.x});
}

std::size_t BoundaryMesh::cell_at(std::size_t p, double t) const {
    double sigma = 0.0;
    const PolyInfo &info = polys_[p];
    return info.cell_index[edge_at(info, t, sigma)];
}

std::vector<double> BoundaryMesh::corner_parameters(std::size_t p) const {
    const PolyInfo &info = polys_[p];
    std::vector<double> out;
    for (std::size_t off : info.edge_offset) out.push_back(2.0 * pi * double(off) / double(info.n));
    return out;
}

}  // namespace polyscat
