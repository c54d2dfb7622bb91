#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyscat/config.hpp"
#include "polyscat/helmholtz.hpp"
#include "polyscat/scene.hpp"

namespace polyscat {

// ---- regular chains ---------------------------------------------------------

struct Ball {
    Vec2 z;
    double rho = 0.0;
};

/// Balls B_{rho_i}(z_i) ordered from the far end (large radii) to the target.
struct BallChain {
    std::vector<Ball> balls;
    ChainConstants a{};

    std::size_t size() const { return balls.size(); }
    bool empty() const { return balls.empty(); }
};

struct ChainCheck {
    bool regular = true;
    std::size_t index = 0;  // first offending ball
    int clause = 0;         // 1: B_{a4 rho} not in G; 2: radius or nesting violated
    std::string detail;

    explicit operator bool() const { return regular; }
};

/// Exact clause check against the exterior of s and of any extra `floors`
/// (obstacles that restrict the admissible region further).
ChainCheck chain_is_regular(const BallChain &c, const Scatterer2D &s, std::span<const Polygon> floors = {});

struct ChainBuild {
    BallChain chain;
    std::vector<Vec2> route;        // corridor polyline from x0 to the tail top
    std::size_t corridor_balls = 0; // balls of radius rho0, x0 included
    std::size_t tail_balls = 0;     // shrinking balls after the corridor
    double rho0 = 0.0;
    double s0 = 0.0;                // last radius / d
    double cone = 0.0;              // radius-to-height ratio of the tail
    double b = 1.0;                 // tail shrink ratio
    double kappa = 0.0;             // n0 <= kappa * log(2eR/d) + kappa_prime
    double kappa_prime = 0.0;
};

/// Chain from x0 to x1: constant-radius corridor along a shortest path with
/// clearance a4*rho0, then a geometric tail down the ray from the nearest
/// boundary point to x1. Throws RoutingError naming the pinch point.
ChainBuild build_chain(const Scatterer2D &s, Vec2 x0, Vec2 x1, double d, const ChainConstants &a, double rho0,
                       std::span<const Polygon> floors = {});

nlohmann::json chain_to_json(const BallChain &c);
BallChain chain_from_json(const nlohmann::json &j, const ChainConstants &a = {});

// ---- three spheres ------------------------------------------------------------

/// Sampled sup-norms on concentric balls B_{r1} c B_r c B_{r2}.
struct SphereNorms {
    double r1 = 0.0, r = 0.0, r2 = 0.0;
    double M1 = 0.0, M = 0.0, M2 = 0.0;
    double pitch = 0.0;
    std::size_t samples = 0;  // per ball
};

/// Sunflower interior samples plus a boundary ring; at least 10^4 points per ball.
std::vector<Vec2> ball_samples(Vec2 center, double radius, std::size_t n = 10000);

SphereNorms sphere_norms(const FieldEvaluator &f, Vec2 center, double r1, double r, double r2,
                         std::size_t samples = 10000);

/// Log-interpolation exponent making M = M2^{1-beta} M1^beta exact; NaN when M1 >= M2.
double beta_fit(const SphereNorms &n);

/// Fleet-fitted constants for M <= C * (1 - r/s)^{-N/2} * M2^{1-beta} M1^beta, s = (r + r2)/2.
struct ThreeSpheresCalibration {
    double C_fleet = 1.0;
    double beta_low = 0.0;   // smallest fitted beta over the fleet
    double beta_high = 1.0;  // largest fitted beta over the fleet
    std::size_t fleet = 0;
    std::size_t degenerate = 0;
};

ThreeSpheresCalibration calibrate_three_spheres(std::span<const SphereNorms> fleet);

/// Paper-shaped prefactor (1 - r/s)^{-N/2} with N = 2 and s midway between r and r2.
double three_spheres_margin(double r, double r2);

struct ThreeSpheresResult {
    bool holds = true;
    bool degenerate = false;  // M1 >= M2: beta undefined
    double beta_fit = 0.0;
    double C_fit = 1.0;       // constant this field needs at beta_low, margin included
    double rhs = 0.0;
    SphereNorms norms;
};

ThreeSpheresResult three_spheres_check(const SphereNorms &norms, const ThreeSpheresCalibration &cal);
/// Samples the field first; balls must lie in f's domain and r2 <= cap.
ThreeSpheresResult three_spheres_check(const FieldEvaluator &f, Vec2 center, double r1, double r, double r2,
                                       const ThreeSpheresCalibration &cal, double cap);

// ---- exponent ledger and smallness propagation ----------------------------------

/// B_n = sum_{r<=n} prod_{i=r..n} beta_i, Gamma_n = prod_{i<=n} beta_i.
struct ExponentLedger {
    std::vector<double> beta;
    std::vector<double> B;
    std::vector<double> Gamma;
    std::vector<double> log_Gamma;  // exact even when Gamma underflows

    std::size_t size() const { return beta.size(); }
};

ExponentLedger ledger(std::span<const double> betas);
std::string ledger_csv(const ExponentLedger &l);

/// Per-ball bounds C^{1+B_{j-1}} E^{1-Gamma_{j-1}} eps^{Gamma_{j-1}}, bound_0 = eps, held in log form.
struct SmallnessBounds {
    std::vector<double> log_bound;

    std::size_t size() const { return log_bound.size(); }
    double bound(std::size_t j) const;
};

SmallnessBounds propagate_smallness(std::size_t balls, double eps, double E, double C, std::span<const double> betas);
SmallnessBounds propagate_smallness(const BallChain &c, double eps, double E, double C, std::span<const double> betas);

// ---- reflections and flatness ----------------------------------------------------

/// u1 = u o T_Pi on the reflected exterior; the gradient is mirrored.
FieldEvaluator reflect_field(const WaveField &u, const HyperplaneLine &pi);

struct Flatness {
    double A = 0.0;
    Vec2 argmax;
    std::size_t samples = 0;
};

/// max |grad u . nu| over Pi intersected with the closed annulus 2R2+2 <= |x| <= 2R2+3,
/// sampled with `intervals` equal steps on each of the (at most two) pieces.
Flatness flatness_indicator(const WaveField &u, const HyperplaneLine &pi, const ScatterConfig &cfg,
                            std::size_t intervals = 127);

// ---- stability moduli ------------------------------------------------------------

/// eta(s) = exp(-sqrt(log(-log s))) on (0, 1/e).
double eta(double s);
/// log eta from log s, for arguments far below the double range.
double log_eta_from_log(double log_s);
/// eta1(e0) = exp(-C1 sqrt(-log e0)) on (0, 1/e).
double eta1(double e0, double C1);
/// 2eR * eta(eps)^C for 0 < eps <= 1/(2e).
double stability_bound(double eps, double C, double R);

}  // namespace polyscat
