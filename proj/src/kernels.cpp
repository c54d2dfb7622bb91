#include "polyscat/kernels.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "parallel.hpp"
#include "polyscat/special.hpp"

namespace polyscat::kernels {

namespace {

constexpr Complex I{0.0, 1.0};

struct H01 {
    Complex h0, h1;
};

H01 hankel(double z) {
    const auto b = special::bessel01(z);
    return {{b.j0, b.y0}, {b.j1, b.y1}};
}

/// Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n.
template <std::size_t N>
struct GaussLegendre {
    std::array<double, N> x{};
    std::array<double, N> w{};
    GaussLegendre() {
        for (std::size_t i = 0; i < N; ++i) {
            double z = std::cos(pi * (double(i) + 0.75) / (double(N) + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = z;
                for (std::size_t m = 2; m <= N; ++m) {
                    const double p2 = ((2.0 * double(m) - 1.0) * z * p1 - (double(m) - 1.0) * p0) / double(m);
                    p0 = p1;
                    p1 = p2;
                }
                dp = double(N) * (z * p1 - p0) / (z * z - 1.0);
                const double dz = p1 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            x[i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
    }
};

const GaussLegendre<16> &gl16() {
    static const GaussLegendre<16> rule;
    return rule;
}

/// Weighted kernel of node j seen from x: w_j (dPhi/dnu_j - i eta Phi).
Complex node_kernel(const Layer &layer, const BoundaryNode &node, Vec2 x) {
    const Vec2 d = x - node.x;
    const double r = norm(d);
    const H01 h = hankel(layer.k * r);
    Complex v = (I * layer.k / 4.0) * h.h1 * (dot(d, node.normal) / r);
    if (layer.eta != 0.0) v -= I * layer.eta * (I / 4.0) * h.h0;
    return node.weight * v;
}

CVec2 kernel_grad(const Layer &layer, Vec2 x, Vec2 y, Vec2 ny) {
    const Vec2 d = x - y;
    const double r = norm(d);
    const H01 h = hankel(layer.k * r);
    const double dn = dot(d, ny);
    const Complex g = h.h1 / r;
    const Complex gp = layer.k * h.h0 / r - 2.0 * h.h1 / (r * r);
    const Complex c = I * layer.k / 4.0;
    CVec2 out{c * (g * ny.x + dn * gp * d.x / r), c * (g * ny.y + dn * gp * d.y / r)};
    if (layer.eta != 0.0) {
        const Complex s = -I * layer.eta * (-I * layer.k / 4.0) * h.h1 / r;
        out.x += s * d.x;
        out.y += s * d.y;
    }
    return out;
}

Complex kernel_value(const Layer &layer, Vec2 x, Vec2 y, Vec2 ny) {
    const Vec2 d = x - y;
    const double r = norm(d);
    const H01 h = hankel(layer.k * r);
    Complex v = (I * layer.k / 4.0) * h.h1 * (dot(d, ny) / r);
    if (layer.eta != 0.0) v -= I * layer.eta * (I / 4.0) * h.h0;
    return v;
}

void fill_row(const Layer &layer, double sign, const std::vector<double> &rlog, std::size_t i,
              Eigen::MatrixXcd &a) {
    const BoundaryMesh &mesh = *layer.mesh;
    const auto &nodes = mesh.nodes();
    const BoundaryNode &xi = nodes[i];
    const std::size_t n_poly = mesh.node_count(xi.polygon);
    const std::size_t first = mesh.first_node(xi.polygon);
    const double k = layer.k;
    const double dt = 2.0 * pi / double(n_poly);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const BoundaryNode &yj = nodes[j];
        Complex entry = (i == j) ? Complex(0.5) : Complex(0.0);
        const bool same_poly = yj.polygon == xi.polygon;
        if (i == j) {
            if (layer.eta != 0.0) {
                const double sp = yj.speed;
                const Complex m1 = -sp / (4.0 * pi);
                const Complex m2 = (I / 4.0 - special::euler_gamma / (2.0 * pi) - std::log(k * sp / 2.0) / (2.0 * pi)) * sp;
                entry -= I * layer.eta * (rlog[0] * m1 + dt * m2);
            }
            a(Eigen::Index(i), Eigen::Index(j)) = entry;
            continue;
        }
        const Vec2 d = xi.x - yj.x;
        const double r = norm(d);
        const auto b = special::bessel01(k * r);
        const Complex h0{b.j0, b.y0}, h1{b.j1, b.y1};
        if (yj.cell != xi.cell) entry += sign * yj.weight * (I * k / 4.0) * h1 * (dot(d, yj.normal) / r);
        if (layer.eta != 0.0) {
            Complex s;
            if (same_poly) {
                const double sp = yj.speed;
                const double m1 = -b.j0 * sp / (4.0 * pi);
                const double half = 0.5 * (xi.t - yj.t);
                const double lg = std::log(4.0 * std::sin(half) * std::sin(half));
                const Complex m2 = (I / 4.0) * h0 * sp - m1 * lg;
                const std::size_t li = i - first, lj = j - first;
                const std::size_t m = li >= lj ? li - lj : lj - li;
                s = rlog[m] * m1 + dt * m2;
            } else {
                s = yj.weight * (I / 4.0) * h0;
            }
            entry -= I * layer.eta * s;
        }
        a(Eigen::Index(i), Eigen::Index(j)) = entry;
    }
}

/// Barycentric Lagrange interpolation of the density of polygon p at parameter t
/// from a cyclic stencil of equispaced nodes.
Complex interpolate_density(const BoundaryMesh &mesh, const Eigen::VectorXcd &density, std::size_t p, double t) {
    constexpr int q = 12;
    static const std::array<double, q> bw = [] {
        std::array<double, q> w{};
        double c = 1.0;
        for (int i = 0; i < q; ++i) {
            w[std::size_t(i)] = (i % 2 == 0 ? 1.0 : -1.0) * c;
            c = c * double(q - 1 - i) / double(i + 1);
        }
        return w;
    }();
    const auto n = static_cast<long>(mesh.node_count(p));
    const std::size_t first = mesh.first_node(p);
    const double h = 2.0 * pi / double(n);
    const long base = static_cast<long>(std::floor(t / h - 0.5)) - q / 2 + 1;
    Complex num = 0.0;
    double den = 0.0;
    for (int s = 0; s < q; ++s) {
        const long j = base + s;
        const double tj = h * (double(j) + 0.5);
        const long jj = ((j % n) + n) % n;
        const Complex f = density[Eigen::Index(first + std::size_t(jj))];
        const double diff = t - tj;
        if (diff == 0.0) return f;
        const double c = bw[std::size_t(s)] / diff;
        num += c * f;
        den += c;
    }
    return num / den;
}

double polygon_distance(const BoundaryMesh &mesh, std::size_t p, Vec2 x) {
    double best = std::numeric_limits<double>::infinity();
    for (const Segment &e : mesh.edges(p)) best = std::min(best, point_segment_distance(x, e));
    return best;
}

constexpr double near_panels = 4.0;

template <class Acc, class Kern>
void integrate_panel(const Layer &layer, const Eigen::VectorXcd &density, std::size_t p, Vec2 x, double a,
                     double b, int depth, Acc &acc, Kern &&kern) {
    const BoundaryMesh &mesh = *layer.mesh;
    const double mid = 0.5 * (a + b);
    // Positions at the panel ends; the parameter is nudged inwards so corner
    // lookups resolve to this edge.
    const double eps = 1e-14 * (b - a);
    const Vec2 ya = mesh.position(p, a + eps), yb = mesh.position(p, b - eps);
    const double len = norm(yb - ya);
    if (depth < 48 && len > 0.8 * point_segment_distance(x, {ya, yb})) {
        integrate_panel(layer, density, p, x, a, mid, depth + 1, acc, kern);
        integrate_panel(layer, density, p, x, mid, b, depth + 1, acc, kern);
        return;
    }
    const auto &rule = gl16();
    const double half = 0.5 * (b - a);
    for (std::size_t g = 0; g < rule.x.size(); ++g) {
        const double t = mid + half * rule.x[g];
        const Vec2 y = mesh.position(p, t);
        const double speed = norm(mesh.tangent(p, t));
        const Vec2 ny = mesh.normal(p, t);
        const Complex rho = interpolate_density(mesh, density, p, t);
        acc += (half * rule.w[g] * speed) * rho * kern(x, y, ny);
    }
}

template <class Acc, class Kern, class Native>
Acc near_sum(const Layer &layer, const Eigen::VectorXcd &density, Vec2 x, Kern &&kern, Native &&native) {
    const BoundaryMesh &mesh = *layer.mesh;
    Acc acc{};
    for (std::size_t p = 0; p < mesh.polygon_count(); ++p) {
        const std::size_t first = mesh.first_node(p), n = mesh.node_count(p);
        if (polygon_distance(mesh, p, x) >= near_panels * mesh.max_spacing(p)) {
            for (std::size_t j = first; j < first + n; ++j) native(acc, j);
            continue;
        }
        const auto corners = mesh.corner_parameters(p);
        for (std::size_t e = 0; e < corners.size(); ++e) {
            const double a = corners[e];
            const double b = e + 1 < corners.size() ? corners[e + 1] : 2.0 * pi;
            integrate_panel(layer, density, p, x, a, b, 0, acc, kern);
        }
    }
    return acc;
}

}  // namespace

Complex single_layer(double k, Vec2 x, Vec2 y) { return (I / 4.0) * hankel(k * norm(x - y)).h0; }

CVec2 single_layer_grad(double k, Vec2 x, Vec2 y) {
    const Vec2 d = x - y;
    const double r = norm(d);
    const Complex c = -(I * k / 4.0) * hankel(k * r).h1 / r;
    return {c * d.x, c * d.y};
}

Complex double_layer(double k, Vec2 x, Vec2 y, Vec2 ny) { return kernel_value({nullptr, k, 0.0}, x, y, ny); }

CVec2 double_layer_grad(double k, Vec2 x, Vec2 y, Vec2 ny) { return kernel_grad({nullptr, k, 0.0}, x, y, ny); }

Complex far_field_constant(double k) { return std::polar(1.0, pi / 4.0) / std::sqrt(8.0 * pi * k); }

std::vector<double> log_weights(std::size_t n) {
    std::vector<double> r(n);
    const double nd = double(n);
    for (std::size_t m = 0; m < n; ++m) {
        const double delta = 2.0 * pi * double(m) / nd;
        double s = 0.0;
        for (std::size_t l = 1; l < n / 2; ++l) s += std::cos(double(l) * delta) / double(l);
        r[m] = -4.0 * pi / nd * s - 4.0 * pi / (nd * nd) * ((m % 2 == 0) ? 1.0 : -1.0);
    }
    return r;
}

Eigen::MatrixXcd assemble(const Layer &layer, double sign, Execution exec) {
    const std::size_t n = layer.mesh->size();
    const auto dim = static_cast<Eigen::Index>(n);
    Eigen::MatrixXcd a(dim, dim);
    std::vector<double> rlog;
    if (layer.eta != 0.0 && layer.mesh->polygon_count() > 0) rlog = log_weights(layer.mesh->node_count(0));
    detail::for_each_index(n, exec, [&](std::size_t i) { fill_row(layer, sign, rlog, i, a); });
    return a;
}

Eigen::MatrixXcd assemble_serial(const Layer &layer, double sign) { return assemble(layer, sign, Execution::serial); }

Eigen::MatrixXcd potential_rows(const Layer &layer, std::span<const Vec2> points, Execution exec) {
    const auto &nodes = layer.mesh->nodes();
    Eigen::MatrixXcd a(Eigen::Index(points.size()), Eigen::Index(nodes.size()));
    detail::for_each_index(points.size(), exec, [&](std::size_t i) {
        for (std::size_t j = 0; j < nodes.size(); ++j)
            a(Eigen::Index(i), Eigen::Index(j)) = node_kernel(layer, nodes[j], points[i]);
    });
    return a;
}

Complex potential(const Layer &layer, const Eigen::VectorXcd &density, Vec2 x) {
    const auto &nodes = layer.mesh->nodes();
    Complex s = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) s += node_kernel(layer, nodes[j], x) * density[Eigen::Index(j)];
    return s;
}

CVec2 potential_grad(const Layer &layer, const Eigen::VectorXcd &density, Vec2 x) {
    const auto &nodes = layer.mesh->nodes();
    CVec2 s{};
    for (std::size_t j = 0; j < nodes.size(); ++j)
        s += (nodes[j].weight * density[Eigen::Index(j)]) * kernel_grad(layer, x, nodes[j].x, nodes[j].normal);
    return s;
}

Complex far_field(const Layer &layer, const Eigen::VectorXcd &density, Vec2 xhat) {
    const auto &nodes = layer.mesh->nodes();
    const double k = layer.k;
    Complex s = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const BoundaryNode &y = nodes[j];
        const Complex phase = std::polar(1.0, -k * dot(xhat, y.x));
        const Complex factor = -I * k * dot(xhat, y.normal) - I * layer.eta;
        s += y.weight * factor * phase * density[Eigen::Index(j)];
    }
    return far_field_constant(k) * s;
}

std::vector<Complex> potential_batch(const Layer &layer, const Eigen::VectorXcd &density,
                                     std::span<const Vec2> points, Execution exec) {
    std::vector<Complex> out(points.size());
    detail::for_each_index(points.size(), exec, [&](std::size_t i) { out[i] = potential(layer, density, points[i]); });
    return out;
}

std::vector<Complex> far_field_batch(const Layer &layer, const Eigen::VectorXcd &density,
                                     std::span<const Vec2> directions, Execution exec) {
    std::vector<Complex> out(directions.size());
    detail::for_each_index(directions.size(), exec,
                           [&](std::size_t i) { out[i] = far_field(layer, density, directions[i]); });
    return out;
}

Complex potential_near(const Layer &layer, const Eigen::VectorXcd &density, Vec2 x) {
    const auto &nodes = layer.mesh->nodes();
    return near_sum<Complex>(
        layer, density, x, [&](Vec2 xx, Vec2 y, Vec2 ny) { return kernel_value(layer, xx, y, ny); },
        [&](Complex &acc, std::size_t j) { acc += node_kernel(layer, nodes[j], x) * density[Eigen::Index(j)]; });
}

CVec2 potential_grad_near(const Layer &layer, const Eigen::VectorXcd &density, Vec2 x) {
    const auto &nodes = layer.mesh->nodes();
    return near_sum<CVec2>(
        layer, density, x, [&](Vec2 xx, Vec2 y, Vec2 ny) { return kernel_grad(layer, xx, y, ny); },
        [&](CVec2 &acc, std::size_t j) {
            acc += (nodes[j].weight * density[Eigen::Index(j)]) * kernel_grad(layer, x, nodes[j].x, nodes[j].normal);
        });
}

}  // namespace polyscat::kernels
