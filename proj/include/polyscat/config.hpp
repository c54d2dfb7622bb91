#pragma once

#include <vector>

#include "polyscat/geometry.hpp"

namespace polyscat {

struct Tolerances {
    double solver = 1e-6;           // Helmholtz residual of represented fields
    double bc = 1e-3;               // boundary-condition residual, relative to k * field scale
    double condition_max = 1e10;    // linear-system condition estimate that triggers a solver error
};

/// Regular-chain constants 0 < a1 < a2 < a3 < 1 < a4.
struct ChainConstants {
    double a1 = 0.2;
    double a2 = 0.5;
    double a3 = 0.8;
    double a4 = 8.0;
};

/// Wavenumber, incident directions and probe geometry for one experiment.
struct ScatterConfig {
    double k = 1.0;
    double k_low = 0.1;
    double k_high = 50.0;
    std::vector<Vec2> directions{{1.0, 0.0}};
    double R = 1.0;
    double R1 = 3.0;
    double rho_tilde = 0.5;
    Vec2 x0{2.75, 0.0};
    double R2 = 6.0;
    int quad_order = 512;       // Nystrom nodes per polygon
    double grading = 4.0;       // corner grading exponent
    int n_far = 256;            // far-field directions for dumps and L2 norms
    int chief_points = 4;       // interior points per polygon (sound-hard only)
    double three_spheres_cap = 0.0;  // rho_tilde_0; 0 selects 2/k
    ChainConstants chain{};
    double rho0 = 0.0;          // chain base radius; 0 selects min(rho_tilde, cap)/16
    Tolerances tol{};

    /// Throws ParameterError naming the first violated inequality.
    void validate() const;
    double effective_three_spheres_cap() const { return three_spheres_cap > 0.0 ? three_spheres_cap : 2.0 / k; }
    double effective_rho0() const;
    Vec2 direction(std::size_t j) const;
};

}  // namespace polyscat
