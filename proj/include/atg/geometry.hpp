#pragma once

#include <array>
#include <cmath>

namespace atg {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
};

constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }

/// Row-major 2x2 matrix.
struct Mat2 {
    double a00 = 0.0, a01 = 0.0;
    double a10 = 0.0, a11 = 0.0;

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Mat2 scaled_identity(double s) { return {s, 0.0, 0.0, s}; }

    constexpr Mat2 transposed() const { return {a00, a10, a01, a11}; }
    constexpr double trace() const { return a00 + a11; }
};

constexpr Vec2 operator*(const Mat2& m, const Vec2& v) {
    return {m.a00 * v.x + m.a01 * v.y, m.a10 * v.x + m.a11 * v.y};
}
constexpr Mat2 operator*(double s, const Mat2& m) {
    return {s * m.a00, s * m.a01, s * m.a10, s * m.a11};
}
constexpr Mat2 operator+(const Mat2& a, const Mat2& b) {
    return {a.a00 + b.a00, a.a01 + b.a01, a.a10 + b.a10, a.a11 + b.a11};
}
constexpr Mat2 operator-(const Mat2& a, const Mat2& b) {
    return {a.a00 - b.a00, a.a01 - b.a01, a.a10 - b.a10, a.a11 - b.a11};
}
/// Frobenius product A : B.
constexpr double contract(const Mat2& a, const Mat2& b) {
    return a.a00 * b.a00 + a.a01 * b.a01 + a.a10 * b.a10 + a.a11 * b.a11;
}

inline bool is_finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }
inline bool is_finite(const Mat2& m) {
    return std::isfinite(m.a00) && std::isfinite(m.a01) && std::isfinite(m.a10) && std::isfinite(m.a11);
}

/// Twice the signed area of (a, b, c); positive for counter-clockwise order.
constexpr double signed_area2(const Vec2& a, const Vec2& b, const Vec2& c) {
    return cross(b - a, c - a);
}

using Barycentric = std::array<double, 3>;

constexpr Vec2 from_barycentric(const std::array<Vec2, 3>& p, const Barycentric& l) {
    return {l[0] * p[0].x + l[1] * p[1].x + l[2] * p[2].x,
            l[0] * p[0].y + l[1] * p[1].y + l[2] * p[2].y};
}

}  // namespace atg
