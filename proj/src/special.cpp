#include "polyscat/special.hpp"

#include <cmath>

namespace polyscat::special {
namespace {

using ld = long double;

Bessel01 series(double xd) {
    const ld x = xd;
    const ld z = x / 2;
    const ld q = z * z;
    // term_m = (-q)^m / (m!)^2 ; J1 term = z (-q)^m / (m! (m+1)!)
    ld t0 = 1, t1 = z;
    ld j0 = t0, j1 = t1;
    ld harm = 0;  // H_m
    ld s0 = 0;    // sum_{m>=1} (-1)^{m+1} H_m q^m/(m!)^2
    ld s1 = t1;   // sum_{m>=0} (-1)^m (H_m + H_{m+1}) z^{2m+1}/(m!(m+1)!) ; m=0 term is z * 1
    for (int m = 1; m < 120; ++m) {
        t0 *= -q / (ld(m) * ld(m));
        t1 *= -q / (ld(m) * ld(m + 1));
        harm += ld(1) / m;
        j0 += t0;
        j1 += t1;
        s0 -= harm * t0;
        s1 += (harm + harm + ld(1) / (m + 1)) * t1;
        if (std::abs(t0) < 1e-22L && std::abs(t1) < 1e-22L && m > 2) break;
    }
    const ld two_over_pi = 2.0L / 3.14159265358979323846264338327950288L;
    const ld lg = std::log(z) + ld(euler_gamma);
    Bessel01 b;
    b.j0 = double(j0);
    b.j1 = double(j1);
    if (xd > 0.0) {
        b.y0 = double(two_over_pi * (lg * j0 + s0));
        b.y1 = double(-two_over_pi / x + two_over_pi * lg * j1 - s1 / 3.14159265358979323846264338327950288L);
    } else {
        b.y0 = -HUGE_VAL;
        b.y1 = -HUGE_VAL;
    }
    return b;
}

/// Hankel's expansion: returns (P, Q) for order nu.
void asymptotic_pq(double x, double nu, double &p, double &q) {
    const double mu = 4.0 * nu * nu;
    double a = 1.0;
    p = 1.0;
    q = 0.0;
    double prev = HUGE_VAL;
    for (int k = 1; k < 60; ++k) {
        const double odd = 2.0 * k - 1.0;
        a *= (mu - odd * odd) / (k * 8.0 * x);
        if (std::abs(a) >= prev) break;  // past the smallest term
        prev = std::abs(a);
        // P collects (-1)^{k/2} a_k over even k, Q collects (-1)^{(k-1)/2} a_k over odd k.
        const int half = (k % 2 == 0) ? k / 2 : (k - 1) / 2;
        const double term = (half % 2 == 0) ? a : -a;
        if (k % 2 == 0) p += term;
        else q += term;
        if (std::abs(a) < 1e-17) break;
    }
}

Bessel01 asymptotic(double x) {
    Bessel01 b;
    const double amp = std::sqrt(2.0 / (pi * x));
    double p, q;
    asymptotic_pq(x, 0.0, p, q);
    double chi = x - 0.25 * pi;
    b.j0 = amp * (p * std::cos(chi) - q * std::sin(chi));
    b.y0 = amp * (p * std::sin(chi) + q * std::cos(chi));
    asymptotic_pq(x, 1.0, p, q);
    chi = x - 0.75 * pi;
    b.j1 = amp * (p * std::cos(chi) - q * std::sin(chi));
    b.y1 = amp * (p * std::sin(chi) + q * std::cos(chi));
    return b;
}

}  // namespace

Bessel01 bessel01(double x) {
    if (x < series_switchover) return series(x);
    return asymptotic(x);
}

}  // namespace polyscat::special
