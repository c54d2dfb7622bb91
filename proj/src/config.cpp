#include "polyscat/config.hpp"

#include <cmath>
#include <sstream>

#include "polyscat/errors.hpp"

namespace polyscat {

namespace {

[[noreturn]] void fail(const std::string &what) { throw ParameterError("config: " + what); }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

void ScatterConfig::validate() const {
    if (!(k > 0.0)) fail("k must be positive (got " + fmt(k) + ")");
    if (!(k_low > 0.0)) fail("k_low must be positive");
    if (!(k >= k_low && k <= k_high)) fail("k = " + fmt(k) + " outside [k_low, k_high]");
    if (directions.empty()) fail("directions: at least one incident direction is required");
    for (std::size_t j = 0; j < directions.size(); ++j)
        if (std::abs(norm(directions[j]) - 1.0) > 1e-9)
            fail("directions[" + std::to_string(j) + "] is not a unit vector");
    if (!(R > 0.0 && rho_tilde > 0.0)) fail("R and rho_tilde must be positive");
    if (!(R + 1.0 + rho_tilde <= R1)) fail("R + 1 + rho_tilde <= R1 violated");
    const double r0 = norm(x0);
    if (!(R + 1.0 + rho_tilde <= r0 && r0 <= R1)) fail("R + 1 + rho_tilde <= |x0| <= R1 violated");
    if (!(R2 >= std::max(2.0 * R1, 4.0 * R))) fail("R2 >= max(2 R1, 4 R) violated");
    if (quad_order < 64 || quad_order % 2 != 0) fail("quad_order must be even and at least 64");
    if (!(grading >= 2.0)) fail("grading exponent must be at least 2");
    if (n_far < 64) fail("n_far must be at least 64");
    if (chief_points < 0) fail("chief_points must be nonnegative");
    const auto &a = chain;
    if (!(0.0 < a.a1 && a.a1 < a.a2 && a.a2 < a.a3 && a.a3 < 1.0 && 1.0 < a.a4))
        fail("chain constants must satisfy 0 < a1 < a2 < a3 < 1 < a4");
    if (three_spheres_cap < 0.0 || rho0 < 0.0) fail("three_spheres_cap and rho0 must be nonnegative");
    if (!(tol.solver > 0.0 && tol.bc > 0.0 && tol.condition_max > 1.0)) fail("tolerances must be positive");
}

double ScatterConfig::effective_rho0() const {
    if (rho0 > 0.0) return rho0;
    return std::min(rho_tilde, effective_three_spheres_cap()) / 16.0;
}

Vec2 ScatterConfig::direction(std::size_t j) const {
    if (j >= directions.size())
        throw ParameterError("direction index " + std::to_string(j) + " out of range (have " +
                             std::to_string(directions.size()) + ")");
    return directions[j];
}

}  // namespace polyscat
