#include <doctest.h>

#include <random>

#include "polyscat/errors.hpp"
#include "polyscat/scene.hpp"
#include "support.hpp"

using namespace polyscat;
using polyscat::test::random_star;

namespace {

Scatterer2D square(double side = 1.0, Vec2 c = {}) { return Scatterer2D({axis_square(side, c)}); }

// Unit square with a rectangular notch of depth 0.2 and width 0.3 cut into its top edge.
Scatterer2D notched_square() {
    return Scatterer2D({Polygon({{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {0.15, 0.5}, {0.15, 0.3},
                                 {-0.15, 0.3}, {-0.15, 0.5}, {-0.5, 0.5}})});
}

}  // namespace

TEST_SUITE("scene") {
    TEST_CASE("validate_scatterer on the unit square") {
        const ClassReport r = validate_scatterer(square(), 0.5, 10.0, 2.0);
        CHECK(r.pass);
        CHECK(r.h_actual == doctest::Approx(1.0));
    }

    TEST_CASE("a collinear midpoint vertex is degenerate") {
        const Scatterer2D s({Polygon({{-0.5, -0.5}, {0.0, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}})});
        const ClassReport r = validate_scatterer(s, 0.25, 10.0, 2.0);
        CHECK_FALSE(r.pass);
        CHECK(r.has("degenerate_vertex"));
    }

    TEST_CASE("L-shaped hexagon with a short edge violates h") {
        const Scatterer2D s({Polygon({{0, 0}, {1, 0}, {1, 0.2}, {0.4, 0.2}, {0.4, 1}, {0, 1}})});
        const ClassReport r = validate_scatterer(s, 0.25, 10.0, 2.0);
        CHECK_FALSE(r.pass);
        CHECK(r.has("min_edge_length"));
        CHECK(r.h_actual == doctest::Approx(0.2));
    }

    TEST_CASE("repeated vertices and bowties are reported, not crashed on") {
        CHECK(validate_scatterer(Scatterer2D({Polygon({{0, 0}, {1, 0}, {1, 0}, {0, 1}})}), 0.1, 10, 2)
                  .has("degenerate_vertex"));
        CHECK(validate_scatterer(Scatterer2D({Polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}})}), 0.1, 10, 2)
                  .has("not_simple"));
        CHECK(validate_scatterer(Scatterer2D({axis_square(1.0), axis_square(1.0, {0.5, 0})}), 0.1, 10, 2)
                  .has("overlap"));
    }

    TEST_CASE("distance_triple of identical squares is zero") {
        const DistanceTriple t = distance_triple(square(), square(), 1e-3);
        CHECK(t.d == 0.0);
        CHECK(t.dhat == 0.0);
        CHECK(t.dtilde == 0.0);
    }

    TEST_CASE("translated square: dhat = dtilde = translation") {
        const DistanceTriple t = distance_triple(square(), square(1.0, {0.1, 0.0}), 1e-4);
        CHECK(t.dhat == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(t.dtilde == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(t.d <= t.dhat + 1e-15);
    }

    TEST_CASE("notched square matches the dense-sampling oracle") {
        const Scatterer2D a = square(), b = notched_square();
        const double res = 1e-4;
        const DistanceTriple t = distance_triple(a, b, res);
        const double dhat = std::max(test::oracle_directed_boundary(a, b, res), test::oracle_directed_boundary(b, a, res));
        const double dtilde = std::max(test::oracle_directed_set(a, b, res), test::oracle_directed_set(b, a, res));
        const double d = std::max(test::oracle_one_sided(a, b, res), test::oracle_one_sided(b, a, res));
        CHECK(std::abs(t.dhat - dhat) <= res);
        CHECK(std::abs(t.dtilde - dtilde) <= res);
        CHECK(std::abs(t.d - d) <= res);
        // Closed forms for this shape.
        CHECK(t.dhat == doctest::Approx(0.2));
        CHECK(t.dtilde == doctest::Approx(0.15));
        CHECK(t.d == doctest::Approx(0.15).epsilon(1e-3));
    }

    TEST_CASE("distance_triple rejects a nonpositive resolution") {
        CHECK_THROWS_AS(distance_triple(square(), square(), 0.0), ParameterError);
        CHECK_THROWS_AS(distance_triple(square(), square(), -1.0), ParameterError);
    }

    TEST_CASE("distance properties on random star pairs") {
        std::mt19937_64 g(11);
        for (int trial = 0; trial < 30; ++trial) {
            const Scatterer2D a({random_star(g, 7, 0.5, 1.0)});
            const Scatterer2D b({random_star(g, 9, 0.5, 1.0, {0.05, -0.03})});
            const Scatterer2D c({random_star(g, 6, 0.4, 0.9)});
            const DistanceTriple ab = distance_triple(a, b, 1e-3), ba = distance_triple(b, a, 1e-3);
            CHECK(ab.dhat == ba.dhat);
            CHECK(ab.dtilde == ba.dtilde);
            CHECK(ab.d == doctest::Approx(ba.d));
            CHECK(ab.d <= ab.dhat + 1e-12);
            CHECK(ab.dtilde <= 2.0 * 1.1);
            // Triangle inequality for the boundary Hausdorff distance.
            CHECK(boundary_hausdorff(a, c) <= boundary_hausdorff(a, b) + boundary_hausdorff(b, c) + 1e-12);
        }
    }

    TEST_CASE("reflect: points and polygons") {
        const HyperplaneLine x_axis = HyperplaneLine::through({0, 0}, {0, 1});
        const Vec2 r = reflect(Vec2{1, 2}, x_axis);
        CHECK(r.x == doctest::Approx(1.0));
        CHECK(r.y == doctest::Approx(-2.0));
        const Vec2 on = reflect(Vec2{3.5, 0}, x_axis);
        CHECK(on == Vec2{3.5, 0});

        const Polygon sq = axis_square(1.0, {0.5, 0.5});
        const Polygon m = reflect(sq, HyperplaneLine::through({0, 0}, {1, 0}));
        CHECK(m.signed_area() > 0.0);
        CHECK(m.centroid().x == doctest::Approx(-0.5));
        CHECK(m.centroid().y == doctest::Approx(0.5));
    }

    TEST_CASE("reflect is an involution") {
        std::mt19937_64 g(3);
        std::uniform_real_distribution<double> U(-5.0, 5.0);
        for (int i = 0; i < 1000; ++i) {
            const HyperplaneLine pi = HyperplaneLine::through({U(g), U(g)}, {U(g), U(g) + 0.01});
            const Vec2 p{U(g), U(g)};
            const Vec2 q = reflect(reflect(p, pi), pi);
            CHECK(norm(q - p) <= 1e-12 * std::max(1.0, norm(p) + norm(pi.point)));
        }
        for (int i = 0; i < 50; ++i) {
            const HyperplaneLine pi = HyperplaneLine::through({U(g), U(g)}, {U(g), 1.0});
            const Scatterer2D s({random_star(g, 8, 0.4, 1.0)});
            CHECK(boundary_hausdorff(reflect(reflect(s, pi), pi), s) <= 1e-12 * (1.0 + norm(pi.point)));
        }
    }

    TEST_CASE("symmetry_lines examples") {
        const auto lines = symmetry_lines(square(), {1, 0}, 1e-9);
        REQUIRE(lines.size() == 1);
        CHECK(std::abs(lines[0].signed_distance({0, 0})) < 1e-12);
        CHECK(std::abs(lines[0].normal.x) < 1e-12);

        const Scatterer2D clipped({Polygon({{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.3}, {0.3, 0.5}, {-0.5, 0.5}})});
        CHECK(symmetry_lines(clipped, {1, 0}, 1e-9).empty());

        const Scatterer2D pair({axis_square(0.5, {0.3, 0.6}), axis_square(0.5, {0.3, -0.6})});
        const auto two = symmetry_lines(pair, {1, 0}, 1e-9);
        REQUIRE(two.size() == 1);
        CHECK(std::abs(two[0].signed_distance({7, 0})) < 1e-12);
    }

    TEST_CASE("symmetry_lines agrees with the Hausdorff distance to the mirror image") {
        std::mt19937_64 g(5);
        for (int i = 0; i < 20; ++i) {
            const Scatterer2D s({random_star(g, 7, 0.5, 1.0)});
            for (const auto &l : symmetry_lines(s, {1, 0}, 1e-9)) CHECK(set_hausdorff(s, reflect(s, l)) <= 1e-9);
            // A generic random star has no symmetry line.
            CHECK(symmetry_lines(s, {1, 0}, 1e-9).empty());
        }
        const Scatterer2D hex({regular_polygon(6, 1.0, {0.2, 0.4})});
        for (const auto &l : symmetry_lines(hex, {1, 0}, 1e-9)) CHECK(set_hausdorff(hex, reflect(hex, l)) <= 1e-9);
        CHECK_FALSE(symmetry_lines(hex, {1, 0}, 1e-9).empty());
    }

    TEST_CASE("exterior connectedness") {
        const double t = 0.5, span = 3.0;
        const double pitch = t / 64.0;
        CHECK(std::abs(exterior_connectedness(square(), t, span) - t) <= 2.0 * pitch);
        CHECK(std::abs(exterior_connectedness(Scatterer2D{}, t, span) - t) <= 2.0 * pitch);

        const double gap = 0.2;
        const Scatterer2D two({axis_square(1.0, {-0.5 - gap / 2, 0}), axis_square(1.0, {0.5 + gap / 2, 0})});
        CHECK(exterior_connectedness(two, t, span) >= gap / 2.0 - pitch);

        CHECK_THROWS_AS(exterior_connectedness(square(), 4.0, 3.0), ParameterError);
    }

    TEST_CASE("perturb examples") {
        const Scatterer2D s = square();
        CHECK(boundary_hausdorff(perturb(s, 0.0, PerturbMode::vertex_jitter, 1), s) == 0.0);

        const Scatterer2D j = perturb(s, 0.01, PerturbMode::vertex_jitter, 7);
        const double dhat = distance_triple(s, j, 1e-4).dhat;
        CHECK(dhat >= 0.0025);
        CHECK(dhat <= 0.04);

        const Scatterer2D n = perturb(s, 0.1, PerturbMode::notch, 1);
        CHECK(n.vertex_count() >= s.vertex_count() + 2);
        const Scatterer2D b = perturb(s, 0.1, PerturbMode::bump, 1);
        CHECK(b.vertex_count() >= s.vertex_count() + 2);

        // Same seed, same output.
        CHECK(perturb(s, 0.02, PerturbMode::vertex_jitter, 9).polygons()[0].vertices() ==
              perturb(s, 0.02, PerturbMode::vertex_jitter, 9).polygons()[0].vertices());
        CHECK_THROWS_AS(perturb(s, -0.1, PerturbMode::bump, 1), ParameterError);
        CHECK_THROWS_AS(perturb(s, 1.0, PerturbMode::vertex_jitter, 1), ParameterError);
    }

    TEST_CASE("perturbations stay in the relaxed class") {
        const Scatterer2D s = square();
        for (auto mode : {PerturbMode::vertex_jitter, PerturbMode::notch, PerturbMode::bump})
            for (std::uint64_t seed = 1; seed <= 5; ++seed) {
                const Scatterer2D p = perturb(s, 0.03, mode, seed);
                CHECK(validate_scatterer(p, 0.5 * s.class_params().h, 2.0 * s.class_params().L, 1.1).pass);
            }
    }

    TEST_CASE("direction_independence examples") {
        const Vec2 two[] = {{1, 0}, {0, 1}};
        CHECK(direction_independence(two).a0 == doctest::Approx(1.0 / std::sqrt(2.0)));
        CHECK(direction_independence(two).spans);

        const Vec2 one[] = {{1, 0}};
        const auto r1 = direction_independence(one);
        CHECK(r1.a0 == 0.0);
        CHECK_FALSE(r1.spans);

        const Vec2 sixty[] = {{1, 0}, {std::cos(pi / 3), std::sin(pi / 3)}};
        // Brute-force minimum over 10^6 unit normals.
        double brute = 1.0;
        for (int i = 0; i < 1000000; ++i) {
            const Vec2 nu = unit_from_angle(pi * i / 1e6);
            brute = std::min(brute, std::max(std::abs(dot(sixty[0], nu)), std::abs(dot(sixty[1], nu))));
        }
        // The sampled minimum can only overshoot, by at most the angular pitch.
        CHECK(direction_independence(sixty).a0 <= brute + 1e-12);
        CHECK(brute - direction_independence(sixty).a0 <= pi / 1e6);
        CHECK(direction_independence(sixty).a0 == doctest::Approx(0.5));

        const Vec2 parallel[] = {{1, 0}, {-1, 0}};
        CHECK_FALSE(direction_independence(parallel).spans);
    }
}
