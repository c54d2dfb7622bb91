#include <doctest.h>

#include <cmath>

#include "polyscat/special.hpp"

using namespace polyscat;

namespace {

struct Row {
    double x, j0, j1, y0, y1;
};

// J0, J1, Y0, Y1 evaluated with mpmath at 30 significant digits.
const Row reference[] = {
    {0.001, 0.999999750000015625, 0.00049999993750000261457, -4.4714166113759232557, -636.62216723113941482},
    {0.1, 0.997501562066040032, 0.049937526036242000321, -1.5342386513503668083, -6.4589510947020266377},
    {0.5, 0.93846980724081290423, 0.24226845767487388638, -0.44451873350670655715, -1.4714723926702430692},
    {1, 0.76519768655796655145, 0.44005058574493351596, 0.088256964215676957983, -0.78121282130028871655},
    {2.5, -0.048383776468197996327, 0.49709410246427403801, 0.49807035961523188783, 0.14591813796678579888},
    {5, -0.17759677131433830435, -0.32757913759146522204, -0.30851762524903378007, 0.1478631433912268448},
    {8, 0.17165080713755390609, 0.23463634685391462438, 0.22352148938756622053, -0.15806046173124749426},
    {12, 0.047689310796833536624, -0.22344710449062761237, -0.22523731263436143369, -0.05709921826089652105},
    {16.9, -0.17878338789121921704, -0.080749254250141969975, -0.075431547555802846918, 0.17663144309012717807},
    {17.1, -0.1592853315322653069, -0.11351884829143513548, -0.10881904730042998866, 0.15617391314836485521},
    {20, 0.16702466434058315473, 0.066833124175850045579, 0.062640596809383831162, -0.16551161436252129586},
    {30, -0.086367983581040211336, -0.11875106261662293652, -0.11729573168666402525, 0.084425570661747234891},
    {50, 0.055812327669251815005, -0.097511828125175137661, -0.098064995470077079029, -0.056795668562014767942},
    {100, 0.019985850304223122424, -0.077145352014112158033, -0.077244313365083152254, -0.020372312002759793305},
    {250, -0.026053373425204233664, -0.043269038410330749511, -0.043216845440366267701, 0.025966992185484582261},
};

double rel(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

}  // namespace

TEST_SUITE("special") {
    TEST_CASE("bessel01 matches high-precision reference values") {
        for (const Row &r : reference) {
            CAPTURE(r.x);
            const auto b = special::bessel01(r.x);
            // Absolute floor near zeros of the functions, where relative error is meaningless.
            CHECK(std::abs(b.j0 - r.j0) <= 1e-13 * std::max(1.0, std::abs(r.j0)) + 2e-12 * std::abs(r.j0));
            CHECK(std::abs(b.j1 - r.j1) <= 1e-13 * std::max(1.0, std::abs(r.j1)) + 2e-12 * std::abs(r.j1));
            CHECK(std::abs(b.y0 - r.y0) <= 1e-13 * std::max(1.0, std::abs(r.y0)) + 2e-12 * std::abs(r.y0));
            CHECK(std::abs(b.y1 - r.y1) <= 1e-13 * std::max(1.0, std::abs(r.y1)) + 2e-12 * std::abs(r.y1));
        }
    }

    TEST_CASE("values away from zeros are relatively accurate") {
        CHECK(rel(special::bessel_y1(0.001), -636.62216723113941482) < 1e-13);
        CHECK(rel(special::bessel_j1(0.001), 0.00049999993750000261457) < 1e-13);
        CHECK(special::bessel_j0(0.0) == 1.0);
        CHECK(special::bessel_j1(0.0) == 0.0);
    }

    TEST_CASE("Wronskian J1 Y0 - J0 Y1 = 2 / (pi x)") {
        for (double x = 0.01; x < 300.0; x *= 1.07) {
            CAPTURE(x);
            const auto b = special::bessel01(x);
            const double w = b.j1 * b.y0 - b.j0 * b.y1;
            CHECK(std::abs(w * pi * x / 2.0 - 1.0) < 1e-12);
        }
    }

    TEST_CASE("agrees with the standard library across the switchover") {
        for (double x = 0.05; x < 120.0; x += 0.137) {
            CAPTURE(x);
            const auto b = special::bessel01(x);
            CHECK(std::abs(b.j0 - std::cyl_bessel_j(0.0, x)) < 1e-12);
            CHECK(std::abs(b.j1 - std::cyl_bessel_j(1.0, x)) < 1e-12);
            CHECK(std::abs(b.y0 - std::cyl_neumann(0.0, x)) < 1e-12 * std::max(1.0, std::abs(b.y0)));
            CHECK(std::abs(b.y1 - std::cyl_neumann(1.0, x)) < 1e-12 * std::max(1.0, std::abs(b.y1)));
        }
    }

    TEST_CASE("continuity at the series/asymptotic switchover") {
        const double x = special::series_switchover;
        const auto lo = special::bessel01(std::nextafter(x, 0.0));
        const auto hi = special::bessel01(std::nextafter(x, 100.0));
        CHECK(std::abs(lo.j0 - hi.j0) < 1e-13);
        CHECK(std::abs(lo.y1 - hi.y1) < 1e-13);
    }

    TEST_CASE("hankel01 packs J + iY") {
        const auto h = special::hankel01(2.5);
        CHECK(h.h0.real() == doctest::Approx(-0.048383776468197996327).epsilon(1e-13));
        CHECK(h.h1.imag() == doctest::Approx(0.14591813796678579888).epsilon(1e-13));
    }
}
