#pragma once

#include <cmath>

namespace stickslip {

/// Plain 2-vector used for positions, velocities and forcing values.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    constexpr bool operator==(const Vec2& o) const = default;

    constexpr double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    constexpr double norm_sq() const { return x * x + y * y; }
    double norm() const { return std::hypot(x, y); }

    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// Unit vector along v.  Caller must guarantee |v| > 0.
inline Vec2 unit(const Vec2& v) {
    const double n = v.norm();
    return {v.x / n, v.y / n};
}

} // namespace stickslip
