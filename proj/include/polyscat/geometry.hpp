#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>

namespace polyscat {

inline constexpr double pi = 3.14159265358979323846;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 &operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2 &operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2 &operator*=(double s) { x *= s; y *= s; return *this; }
    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
    friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
    friend std::ostream &operator<<(std::ostream &os, Vec2 v) { return os << '(' << v.x << ", " << v.y << ')'; }
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
constexpr double norm2(Vec2 a) { return dot(a, a); }
inline Vec2 normalized(Vec2 a) { return a / norm(a); }
/// Counterclockwise rotation by 90 degrees.
constexpr Vec2 perp(Vec2 a) { return {-a.y, a.x}; }
inline Vec2 rotated(Vec2 a, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * a.x - s * a.y, s * a.x + c * a.y};
}
inline Vec2 unit_from_angle(double angle) { return {std::cos(angle), std::sin(angle)}; }

using Complex = std::complex<double>;

/// Complex 2-vector, used for field gradients.
struct CVec2 {
    Complex x{};
    Complex y{};
    friend CVec2 operator+(CVec2 a, CVec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend CVec2 operator-(CVec2 a, CVec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend CVec2 operator*(Complex s, CVec2 a) { return {s * a.x, s * a.y}; }
    CVec2 &operator+=(CVec2 o) { x += o.x; y += o.y; return *this; }
};

inline Complex dot(CVec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(CVec2 a) { return std::sqrt(std::norm(a.x) + std::norm(a.y)); }

struct Segment {
    Vec2 a;
    Vec2 b;

    Vec2 direction() const { return b - a; }
    double length() const { return norm(b - a); }
    Vec2 midpoint() const { return 0.5 * (a + b); }
    Vec2 at(double t) const { return a + t * (b - a); }
};

/// Parameter in [0,1] of the point of `s` closest to `p`.
inline double closest_parameter(Vec2 p, const Segment &s) {
    const Vec2 d = s.b - s.a;
    const double len2 = norm2(d);
    if (len2 == 0.0) return 0.0;
    return std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
}

inline double point_segment_distance(Vec2 p, const Segment &s) {
    return norm(p - s.at(closest_parameter(p, s)));
}

/// Orientation predicate: >0 if c lies left of a->b.
inline double orient(Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); }

/// True when the closed segments share at least one point.
inline bool segments_intersect(const Segment &s, const Segment &t) {
    const double d1 = orient(t.a, t.b, s.a);
    const double d2 = orient(t.a, t.b, s.b);
    const double d3 = orient(s.a, s.b, t.a);
    const double d4 = orient(s.a, s.b, t.b);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    auto on_segment = [](Vec2 p, const Segment &seg) {
        return std::min(seg.a.x, seg.b.x) <= p.x && p.x <= std::max(seg.a.x, seg.b.x) &&
               std::min(seg.a.y, seg.b.y) <= p.y && p.y <= std::max(seg.a.y, seg.b.y);
    };
    if (d1 == 0 && on_segment(s.a, t)) return true;
    if (d2 == 0 && on_segment(s.b, t)) return true;
    if (d3 == 0 && on_segment(t.a, s)) return true;
    if (d4 == 0 && on_segment(t.b, s)) return true;
    return false;
}

inline double segment_segment_distance(const Segment &s, const Segment &t) {
    if (segments_intersect(s, t)) return 0.0;
    return std::min({point_segment_distance(s.a, t), point_segment_distance(s.b, t),
                     point_segment_distance(t.a, s), point_segment_distance(t.b, s)});
}

}  // namespace polyscat
