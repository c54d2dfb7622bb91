#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "polyscat/errors.hpp"
#include "polyscat/propagation.hpp"
#include "support.hpp"

using namespace polyscat;

namespace {

const ChainConstants loose{0.2, 0.5, 0.8, 2.0};

// B_n = sum_{i <= n} prod_{l = i..n} beta_l, Gamma_n = prod_{l <= n} beta_l.
double brute_B(const std::vector<double> &b, std::size_t n) {
    double sum = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        double p = 1.0;
        for (std::size_t l = i; l <= n; ++l) p *= b[l];
        sum += p;
    }
    return sum;
}

// Bound after j links: L <- log C + beta L + (1 - beta) log E, starting from
// L = log(C eps). The zeroth ball carries eps itself.
double brute_log_bound(const std::vector<double> &b, std::size_t j, double eps, double E, double C) {
    if (j == 0) return std::log(eps);
    double L = std::log(C) + std::log(eps);
    for (std::size_t i = 0; i < j; ++i) L = std::log(C) + b[i] * L + (1.0 - b[i]) * std::log(E);
    return L;
}

FieldEvaluator plane_wave(double k, Vec2 v) {
    return {[=](Vec2 x) { return std::polar(1.0, k * dot(x, v)); },
            [=](Vec2 x) {
                const Complex c = Complex(0, k) * std::polar(1.0, k * dot(x, v));
                return CVec2{c * v.x, c * v.y};
            },
            [](Vec2) { return true; }};
}

FieldEvaluator bessel3(Vec2 c) {
    return {[=](Vec2 x) {
                const Vec2 d = x - c;
                return std::cyl_bessel_j(3.0, norm(d)) * std::polar(1.0, 3.0 * std::atan2(d.y, d.x));
            },
            [](Vec2) { return CVec2{}; }, [](Vec2) { return true; }};
}

}  // namespace

TEST_SUITE("propagation") {
    TEST_CASE("eta and eta1 examples") {
        CHECK(eta(std::exp(-std::exp(1.0))) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
        CHECK(eta(std::exp(-std::exp(4.0))) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
        CHECK(eta1(std::exp(-4.0), 1.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
        // s = exp(-e^16) underflows a double; the log-domain form still gives log eta = -4.
        CHECK(log_eta_from_log(-std::exp(16.0)) == doctest::Approx(-4.0).epsilon(1e-14));
        CHECK(stability_bound(0.1, 1.0, 1.0) == doctest::Approx(2.0 * std::exp(1.0) * eta(0.1)));
    }

    TEST_CASE("moduli reject arguments outside their domain") {
        CHECK_THROWS_AS(eta(0.0), ParameterError);
        CHECK_THROWS_AS(eta(std::exp(-1.0)), ParameterError);
        CHECK_THROWS_AS(eta(0.5), ParameterError);
        CHECK_THROWS_AS(eta1(0.0, 1.0), ParameterError);
        CHECK_THROWS_AS(eta1(0.1, 0.0), ParameterError);
        CHECK_THROWS_AS(stability_bound(0.2, 1.0, 1.0), ParameterError);
        CHECK_THROWS_AS(log_eta_from_log(-0.5), ParameterError);
    }

    TEST_CASE("eta and eta1 are strictly increasing and vanish at zero") {
        double pe = 0.0, p1 = 0.0;
        for (double s = 1e-300; s < 0.36; s *= 1.5) {
            const double e = eta(s), e1 = eta1(s, 0.7);
            CHECK(e > pe);
            CHECK(e1 > p1);
            pe = e, p1 = e1;
        }
        CHECK(std::exp(log_eta_from_log(-std::exp(400.0))) < 1e-8);
    }

    TEST_CASE("chain_is_regular examples") {
        const Scatterer2D sq({axis_square(1.0)});
        BallChain one{{{{5.0, 0.0}, 0.1}}, ChainConstants{}};
        CHECK(chain_is_regular(one, sq));

        BallChain line;
        line.a = loose;
        const double rho = 0.2;
        for (int i = 0; i < 40; ++i) line.balls.push_back({{-4.0 + i * rho / 4.0, 3.0}, rho});
        CHECK(chain_is_regular(line, sq));
        CHECK(chain_is_regular(line, Scatterer2D{}));

        BallChain bad = line;
        bad.balls[7].rho = 1.5 * rho;
        const ChainCheck c = chain_is_regular(bad, sq);
        CHECK_FALSE(c);
        CHECK(c.clause == 2);
        CHECK(c.index == 7);

        BallChain hits = line;
        for (auto &b : hits.balls) b.z = {b.z.x + 2.5, 0.0};  // now runs into the square
        const ChainCheck h = chain_is_regular(hits, sq);
        CHECK_FALSE(h);
        CHECK(h.clause == 1);
    }

    TEST_CASE("build_chain on the empty scene is a straight constant chain") {
        const ScatterConfig cfg;
        const double rho0 = cfg.effective_rho0();
        const ChainBuild b = build_chain(Scatterer2D{}, {5, 0}, {-5, 0}, 1.0, cfg.chain, rho0);
        CHECK(chain_is_regular(b.chain, Scatterer2D{}));
        CHECK(b.tail_balls == 0);
        for (const Ball &ball : b.chain.balls) {
            CHECK(ball.rho == rho0);
            CHECK(std::abs(ball.z.y) < 1e-12);
        }
        CHECK(norm(b.chain.balls.front().z - Vec2{5, 0}) < 1e-12);
        CHECK(norm(b.chain.balls.back().z - Vec2{-5, 0}) < 1e-12);
    }

    TEST_CASE("build_chain routes around a square") {
        const ScatterConfig cfg;
        const double rho0 = cfg.effective_rho0();
        const Scatterer2D sq({axis_square(1.0)});
        const ChainBuild b = build_chain(sq, {-3, 0}, {3, 0}, 1.0, cfg.chain, rho0);
        CHECK(chain_is_regular(b.chain, sq));
        const double bound = 6.0 / (rho0 / 4.0) + 4.0 / (rho0 / 4.0) + double(b.tail_balls);
        CHECK(double(b.chain.size()) <= bound);
        bool detour = false;
        for (const Ball &ball : b.chain.balls) detour = detour || std::abs(ball.z.y) > 0.5;
        CHECK(detour);
    }

    TEST_CASE("chain length grows linearly in log(1/d)") {
        const ScatterConfig cfg;
        const double rho0 = cfg.effective_rho0();
        const Scatterer2D sq({axis_square(1.0)});
        std::vector<double> xs, ys;
        for (double d = 1e-1; d >= 0.99e-4; d /= std::sqrt(10.0)) {
            const ChainBuild b = build_chain(sq, {-3, 0}, {0.5 + d, 0.1}, d, cfg.chain, rho0);
            CHECK(chain_is_regular(b.chain, sq));
            // n0 = links <= kappa log(2eR/d) + kappa'
            CHECK(double(b.chain.size() - 1) <= b.kappa * std::log(2.0 * std::exp(1.0) * sq.class_params().R / d) +
                                                b.kappa_prime + 1e-9);
            xs.push_back(std::log(1.0 / d));
            ys.push_back(double(b.chain.size()));
        }
        const double n = double(xs.size());
        const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
        const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
        double sxy = 0, sxx = 0, syy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
            syy += (ys[i] - my) * (ys[i] - my);
        }
        CHECK(sxy / sxx > 0.0);
        CHECK(sxy * sxy / (sxx * syy) >= 0.95);
    }

    TEST_CASE("build_chain reports the pinch point of a blocked pocket") {
        // A C-shaped obstacle with a slot narrower than the chain's clearance. The
        // nearest wall to x1 faces across the slot, so no cone tail fits.
        const Scatterer2D c({Polygon({{-1, -1}, {1, -1}, {1, -0.05}, {-0.5, -0.05}, {-0.5, 0.05}, {1, 0.05}, {1, 1},
                                      {-1, 1}})});
        const ScatterConfig cfg;
        try {
            build_chain(c, {-3, 0}, {0.0, 0.02}, 0.03, cfg.chain, cfg.effective_rho0());
            FAIL("expected a routing error");
        } catch (const RoutingError &e) {
            CHECK(std::string(e.what()).find("pinch point") != std::string::npos);
        }
    }

    TEST_CASE("chain JSON round trip") {
        const ScatterConfig cfg;
        const Scatterer2D sq({axis_square(1.0)});
        const ChainBuild b = build_chain(sq, {-3, 0}, {0.51, 0.0}, 0.01, cfg.chain, cfg.effective_rho0());
        const BallChain back = chain_from_json(nlohmann::json::parse(chain_to_json(b.chain).dump()), cfg.chain);
        REQUIRE(back.size() == b.chain.size());
        for (std::size_t i = 0; i < back.size(); ++i) {
            CHECK(back.balls[i].z == b.chain.balls[i].z);
            CHECK(back.balls[i].rho == b.chain.balls[i].rho);
        }
        CHECK(chain_is_regular(back, sq));
    }

    TEST_CASE("three spheres: plane wave is degenerate and holds") {
        const SphereNorms n = sphere_norms(plane_wave(1.0, {1, 0}), {0, 0}, 0.5, 1.0, 2.0);
        CHECK(n.M1 == doctest::Approx(1.0));
        CHECK(n.M == doctest::Approx(1.0));
        CHECK(n.M2 == doctest::Approx(1.0));
        const ThreeSpheresCalibration cal{};
        const ThreeSpheresResult r = three_spheres_check(n, cal);
        CHECK(r.holds);
        CHECK(r.degenerate);
    }

    TEST_CASE("three spheres: Fourier-Bessel mode J3 against a dense-sampling oracle") {
        const Vec2 c{0.3, -0.2};
        const FieldEvaluator f = bessel3(c);
        const SphereNorms n = sphere_norms(f, c, 0.5, 1.0, 2.0);
        // Dense polar grid at pitch r1/200.
        auto dense = [&](double radius) {
            const double pitch = 0.5 / 200.0;
            double m = 0.0;
            for (double r = 0.0; r <= radius + 1e-15; r += pitch) {
                const int na = std::max(8, int(std::ceil(2 * pi * r / pitch)));
                for (int a = 0; a < na; ++a) m = std::max(m, std::abs(f.value(c + r * unit_from_angle(2 * pi * a / na))));
            }
            return m;
        };
        const double M1 = dense(0.5), M = dense(1.0), M2 = dense(2.0);
        CHECK(n.M1 == doctest::Approx(M1).epsilon(1e-6));
        CHECK(n.M == doctest::Approx(M).epsilon(1e-6));
        CHECK(n.M2 == doctest::Approx(M2).epsilon(1e-6));
        // |J3| is increasing on [0, 2], so the sups are attained on the sphere.
        CHECK(n.M2 == doctest::Approx(std::cyl_bessel_j(3.0, 2.0)).epsilon(1e-12));
        const double beta = std::log(M / M2) / std::log(M1 / M2);
        CHECK(beta_fit(n) == doctest::Approx(beta).epsilon(1e-6));
        CHECK(beta_fit(n) > 0.0);
        CHECK(beta_fit(n) < 1.0);
    }

    TEST_CASE("three spheres: calibration holds on its own fleet") {
        std::mt19937_64 g(8);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::vector<SphereNorms> fleet;
        for (int i = 0; i < 20; ++i) {
            const int waves = 1 + int(8 * U(g)) % 8;
            std::vector<std::pair<Complex, Vec2>> terms;
            for (int w = 0; w < waves; ++w)
                terms.push_back({std::polar(U(g), 2 * pi * U(g)), unit_from_angle(2 * pi * U(g))});
            FieldEvaluator f{[terms](Vec2 x) {
                                 Complex s = 0;
                                 for (const auto &[a, v] : terms) s += a * std::polar(1.0, dot(x, v));
                                 return s;
                             },
                             [](Vec2) { return CVec2{}; }, [](Vec2) { return true; }};
            fleet.push_back(sphere_norms(f, {0, 0}, 0.5, 1.0, 2.0));
        }
        const ThreeSpheresCalibration cal = calibrate_three_spheres(fleet);
        CHECK(cal.C_fleet >= 1.0);
        for (const SphereNorms &n : fleet) {
            const ThreeSpheresResult r = three_spheres_check(n, cal);
            CHECK(r.holds);
            if (!r.degenerate) {
                CHECK(r.beta_fit > 0.0);
                CHECK(r.beta_fit < 1.0);
            }
        }
        const SphereNorms flat[] = {sphere_norms(plane_wave(1.0, {0, 1}), {0, 0}, 0.5, 1.0, 2.0)};
        CHECK_THROWS_AS(calibrate_three_spheres(flat), FitError);
    }

    TEST_CASE("three spheres: radius cap and domain") {
        const ThreeSpheresCalibration cal{};
        CHECK_THROWS_AS(three_spheres_check(plane_wave(1.0, {1, 0}), {0, 0}, 0.5, 1.0, 2.0, cal, 1.5), ParameterError);
        FieldEvaluator hole = plane_wave(1.0, {1, 0});
        hole.in_domain = [](Vec2 x) { return norm(x - Vec2{1.5, 0}) > 0.2; };
        CHECK_THROWS_AS(sphere_norms(hole, {0, 0}, 0.5, 1.0, 2.0), DomainError);
        CHECK_THROWS_AS(sphere_norms(hole, {0, 0}, 1.0, 0.5, 2.0), ParameterError);
    }

    TEST_CASE("ledger examples") {
        const double half[] = {0.5, 0.5};
        const ExponentLedger l = ledger(half);
        CHECK(l.Gamma[1] == 0.25);
        CHECK(l.B[1] == 0.75);
        const double b[] = {0.3};
        const ExponentLedger one = ledger(b);
        CHECK(one.Gamma[0] == 0.3);
        CHECK(one.B[0] == 0.3);
        const double bad[] = {0.5, 1.0};
        CHECK_THROWS_AS(ledger(bad), ParameterError);
        const double zero[] = {0.0};
        CHECK_THROWS_AS(ledger(zero), ParameterError);
        CHECK(ledger_csv(l).rfind("i,beta,B,Gamma\n", 0) == 0);
    }

    TEST_CASE("ledger and propagation match brute force on random lists") {
        std::mt19937_64 g(99);
        std::uniform_real_distribution<double> U(0.01, 0.99);
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t n = 1 + g() % 50;
            std::vector<double> b(n);
            for (double &x : b) x = U(g);
            const ExponentLedger l = ledger(b);
            double prev = 1.0;
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(l.B[i] == doctest::Approx(brute_B(b, i)).epsilon(1e-12));
                CHECK(l.Gamma[i] < prev);
                prev = l.Gamma[i];
            }
            const double eps = 1e-6, E = 3.0, C = 1.7;
            const SmallnessBounds s = propagate_smallness(n + 1, eps, E, C, b);
            for (std::size_t j = 0; j <= n; ++j)
                CHECK(s.log_bound[j] == doctest::Approx(brute_log_bound(b, j, eps, E, C)).epsilon(1e-12));
        }
    }

    TEST_CASE("propagate_smallness examples") {
        std::vector<double> b(10, 0.5);
        // eps = E collapses every bound to C^{1+B} E.
        const SmallnessBounds same = propagate_smallness(11, 2.0, 2.0, 1.5, b);
        const ExponentLedger l = ledger(b);
        for (std::size_t j = 1; j <= 10; ++j) {
            CHECK(same.bound(j) == doctest::Approx(std::pow(1.5, 1.0 + l.B[j - 1]) * 2.0).epsilon(1e-13));
            CHECK(same.bound(j) >= 2.0);
        }
        // Ten links, beta = 1/2, C = 2, E = 1, eps = 1e-8.
        const SmallnessBounds ten = propagate_smallness(11, 1e-8, 1.0, 2.0, b);
        const double direct = std::pow(2.0, 1.0 + l.B[9]) * std::pow(1e-8, std::pow(2.0, -10.0));
        CHECK(ten.bound(10) == doctest::Approx(direct).epsilon(1e-13));
        // beta -> 1 with C = 1 gives back eps.
        std::vector<double> near1(10, 1.0 - 1e-8);
        const SmallnessBounds lim = propagate_smallness(11, 1e-2, 1.0, 1.0, near1);
        for (std::size_t j = 0; j <= 10; ++j) CHECK(std::abs(lim.bound(j) / 1e-2 - 1.0) <= 1e-6);
        // Monotone in eps; monotone along the chain for constant beta and C >= 1.
        const SmallnessBounds bigger = propagate_smallness(11, 1.01e-8, 1.0, 2.0, b);
        for (std::size_t j = 0; j <= 10; ++j) CHECK(bigger.log_bound[j] > ten.log_bound[j]);
        for (std::size_t j = 1; j <= 10; ++j) CHECK(ten.log_bound[j] >= ten.log_bound[j - 1]);
        CHECK_THROWS_AS(propagate_smallness(3, 1e-3, 1.0, 1.0, b), ParameterError);
        CHECK_THROWS_AS(propagate_smallness(11, 2.0, 1.0, 1.0, b), ParameterError);
    }

    TEST_CASE("reflected fields") {
        ScatterConfig cfg;
        cfg.quad_order = 256;
        const WaveField u = solve(Scatterer2D({axis_square(1.0)}), cfg, 0);
        const HyperplaneLine axis = HyperplaneLine::through({0, 0}, {0, 1});
        const FieldEvaluator u1 = reflect_field(u, axis);
        CHECK(u1.value({2.0, 0.0}) == u.eval({2.0, 0.0}).value);

        const HyperplaneLine tilted = HyperplaneLine::through({0.1, 3.0}, {0.3, 1.0});
        const FieldEvaluator once = reflect_field(u, tilted);
        for (Vec2 x : {Vec2{2, 1}, Vec2{-3, 0.5}, Vec2{0.4, 4}}) {
            const Vec2 y = reflect(x, tilted);
            if (!once.in_domain(y)) continue;
            CHECK(std::abs(once.value(y) - u.eval(x).value) <= 1e-12 * std::abs(u.eval(x).value) + 1e-14);
        }

        // The square is symmetric about y = 0 and v = (1, 0) lies along it.
        double worst = 0.0;
        for (int m = 0; m < 64; ++m) {
            const Vec2 x = (cfg.R2 + 0.5) * unit_from_angle(2 * pi * (m + 0.3) / 64.0);
            worst = std::max(worst, std::abs(u1.value(x) - u.eval(x).value));
        }
        CHECK(worst <= 10.0 * cfg.tol.solver);
        CHECK_THROWS_AS(u1.value({0.0, 0.1}), DomainError);
    }

    TEST_CASE("flatness indicator") {
        ScatterConfig cfg;
        const WaveField empty = solve(Scatterer2D{}, cfg, 0);
        const Flatness along = flatness_indicator(empty, HyperplaneLine::through({0, 0}, {0, 1}), cfg);
        CHECK(along.A <= 1e-14);
        CHECK(along.samples >= 256);
        const Flatness across = flatness_indicator(empty, HyperplaneLine::through({0, 0}, {1, 0}), cfg);
        CHECK(across.A == doctest::Approx(cfg.k).epsilon(1e-14));
        CHECK_THROWS_AS(flatness_indicator(empty, HyperplaneLine::through({0, 100}, {0, 1}), cfg), ParameterError);

        cfg.quad_order = 512;
        const WaveField u = solve(Scatterer2D({axis_square(1.0)}), cfg, 0);
        const HyperplaneLine sym = HyperplaneLine::through({0, 0}, {0, 1});
        CHECK(flatness_indicator(u, sym, cfg).A <= 1e-4 * cfg.k);

        // The discrete argmax stays within one coarse grid cell when the sampling doubles.
        const HyperplaneLine off = HyperplaneLine::through({0, 0}, rotated({0, 1}, 5.0 * pi / 180.0));
        const Flatness coarse = flatness_indicator(u, off, cfg, 127);
        const Flatness fine = flatness_indicator(u, off, cfg, 254);
        CHECK(norm(coarse.argmax - fine.argmax) <= 1.0 / 127.0 + 1e-12);
        CHECK(fine.A >= coarse.A);
    }
}
