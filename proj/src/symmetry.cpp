#include <algorithm>
#include <cmath>

#include "polyscat/scene.hpp"

namespace polyscat {

std::vector<HyperplaneLine> symmetry_lines(const Scatterer2D &s, Vec2 v, double tol) {
    std::vector<HyperplaneLine> out;
    if (s.empty()) return out;
    const Vec2 nu = normalized(perp(v));

    // A mirror line parallel to v either swaps a vertex pair (which then differs
    // only along nu) or fixes a vertex; its offset along nu is the pair midpoint.
    std::vector<Vec2> verts;
    for (const auto &poly : s.polygons())
        for (const auto &p : poly.vertices()) verts.push_back(p);
    std::vector<double> offsets;
    const double pair_tol = 2.0 * tol + 1e-12;
    for (std::size_t i = 0; i < verts.size(); ++i)
        for (std::size_t j = i; j < verts.size(); ++j)
            if (std::abs(dot(verts[i] - verts[j], v)) <= pair_tol) offsets.push_back(0.5 * dot(verts[i] + verts[j], nu));
    std::sort(offsets.begin(), offsets.end());
    std::vector<double> unique;
    for (double c : offsets)
        if (unique.empty() || c - unique.back() > std::max(tol, 1e-12)) unique.push_back(c);

    for (double c : unique) {
        const HyperplaneLine line = HyperplaneLine::through(c * nu, nu);
        if (boundary_hausdorff(s, reflect(s, line)) <= tol) out.push_back(line);
    }
    return out;
}

}  // namespace polyscat
