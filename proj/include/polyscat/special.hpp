#pragma once

#include "polyscat/geometry.hpp"

/// Bessel and Hankel functions of order 0 and 1 for real positive argument.
///
/// Power series (evaluated in extended precision) below the switchover point and
/// Hankel's asymptotic expansion above it.
namespace polyscat::special {

inline constexpr double euler_gamma = 0.57721566490153286061;
inline constexpr double series_switchover = 17.0;

struct Bessel01 {
    double j0 = 0.0;
    double j1 = 0.0;
    double y0 = 0.0;
    double y1 = 0.0;
};

/// J0, J1, Y0, Y1 at x > 0. J-values are also valid at x = 0 (Y diverges there).
Bessel01 bessel01(double x);

struct Hankel01 {
    Complex h0;
    Complex h1;
};

/// Hankel functions of the first kind H0^(1), H1^(1).
inline Hankel01 hankel01(double x) {
    const Bessel01 b = bessel01(x);
    return {{b.j0, b.y0}, {b.j1, b.y1}};
}

inline double bessel_j0(double x) { return bessel01(x).j0; }
inline double bessel_j1(double x) { return bessel01(x).j1; }
inline double bessel_y0(double x) { return bessel01(x).y0; }
inline double bessel_y1(double x) { return bessel01(x).y1; }

}  // namespace polyscat::special
