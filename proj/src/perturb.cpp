#include <cmath>
#include <random>

#include "polyscat/errors.hpp"
#include "polyscat/scene.hpp"

namespace polyscat {

std::string to_string(PerturbMode m) {
    switch (m) {
        case PerturbMode::vertex_jitter: return "vertex-jitter";
        case PerturbMode::notch: return "notch";
        case PerturbMode::bump: return "bump";
    }
    return "unknown";
}

PerturbMode perturb_mode_from_string(const std::string &s) {
    if (s == "vertex-jitter" || s == "jitter") return PerturbMode::vertex_jitter;
    if (s == "notch") return PerturbMode::notch;
    if (s == "bump") return PerturbMode::bump;
    throw ValidationError("mode: expected vertex-jitter, notch or bump, got \"" + s + "\"");
}

namespace {

constexpr int max_attempts = 100;

Scatterer2D jitter_once(const Scatterer2D &s, double magnitude, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * pi);
    std::vector<Polygon> out;
    for (const auto &poly : s.polygons()) {
        std::vector<Vec2> v;
        for (const auto &p : poly.vertices()) v.push_back(p + magnitude * unit_from_angle(angle(rng)));
        out.emplace_back(std::move(v));
    }
    return Scatterer2D(std::move(out), s.bc(), s.class_params());
}

/// Triangular indentation (sign -1) or protrusion (+1) of depth `magnitude` and base width h.
Scatterer2D dent_once(const Scatterer2D &s, double magnitude, double sign, std::mt19937_64 &rng) {
    const double h = s.class_params().h;
    const double width = h;
    std::vector<std::size_t> eligible;
    for (std::size_t c = 0; c < s.cells().size(); ++c)
        if (s.cells()[c].segment.length() >= 2.0 * h) eligible.push_back(c);
    if (eligible.empty()) throw GenerationError("no edge long enough (>= 2h) to carry a notch or bump");
    std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
    const Cell &cell = s.cells()[eligible[pick(rng)]];
    const double len = cell.segment.length();
    std::uniform_real_distribution<double> centre(h, len - h);
    const double c = centre(rng);
    const Vec2 e = cell.segment.direction() / len;
    const Vec2 a = cell.segment.a;

    std::vector<Polygon> polys = s.polygons();
    std::vector<Vec2> v;
    const auto &old = polys[cell.polygon].vertices();
    for (std::size_t i = 0; i < old.size(); ++i) {
        v.push_back(old[i]);
        if (i == cell.edge) {
            v.push_back(a + (c - 0.5 * width) * e);
            v.push_back(a + c * e + sign * magnitude * cell.normal);
            v.push_back(a + (c + 0.5 * width) * e);
        }
    }
    polys[cell.polygon] = Polygon(std::move(v));
    return Scatterer2D(std::move(polys), s.bc(), s.class_params());
}

}  // namespace

Scatterer2D perturb(const Scatterer2D &s, double magnitude, PerturbMode mode, std::uint64_t seed) {
    if (!(magnitude >= 0.0)) throw ParameterError("perturbation magnitude must be nonnegative");
    const ClassParams base = s.class_params();
    if (mode == PerturbMode::vertex_jitter && magnitude >= 0.25 * base.h)
        throw ParameterError("vertex-jitter magnitude must be below h/4");
    if (magnitude == 0.0) return s;

    const ClassParams relaxed{0.5 * base.h, 2.0 * base.L, base.R + magnitude};
    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Scatterer2D candidate = mode == PerturbMode::vertex_jitter
                                    ? jitter_once(s, magnitude, rng)
                                    : dent_once(s, magnitude, mode == PerturbMode::notch ? -1.0 : 1.0, rng);
        candidate = candidate.with_params(relaxed);
        if (!validate_scatterer(candidate).pass) continue;
        const double dhat = boundary_hausdorff(s, candidate);
        if (dhat < 0.25 * magnitude || dhat > 4.0 * magnitude) continue;
        return candidate;
    }
    throw GenerationError("could not produce a valid " + to_string(mode) + " perturbation after " +
                          std::to_string(max_attempts) + " attempts");
}

}  // namespace polyscat
