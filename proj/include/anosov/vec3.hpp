#pragma once
// Minimal 3D vector math used throughout. No external linear algebra
// dependency: everything here is 3-component double arithmetic.

#include <cmath>

namespace anosov {

struct Vec3 {
    double x{0.0};
    double y{0.0};
    double z{0.0};

    constexpr Vec3() = default;
    constexpr Vec3(double X, double Y, double Z) : x(X), y(Y), z(Z) {}

    constexpr Vec3 operator+(const Vec3& r) const { return {x + r.x, y + r.y, z + r.z}; }
    constexpr Vec3 operator-(const Vec3& r) const { return {x - r.x, y - r.y, z - r.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    friend constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

    constexpr double dot(const Vec3& r) const { return x * r.x + y * r.y + z * r.z; }
    constexpr Vec3 cross(const Vec3& r) const {
        return {y * r.z - z * r.y, z * r.x - x * r.z, x * r.y - y * r.x};
    }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }
    Vec3 normalized() const {
        const double n = norm();
        return {x / n, y / n, z / n};
    }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.dot(b); }
inline Vec3 cross(const Vec3& a, const Vec3& b) { return a.cross(b); }

// 3x3 rotation matrix (row major), used for equivariance tests and table
// generators.
struct Mat3 {
    double m[3][3]{};

    static Mat3 identity() {
        Mat3 r;
        r.m[0][0] = r.m[1][1] = r.m[2][2] = 1.0;
        return r;
    }

    // Rodrigues rotation about a unit axis.
    static Mat3 rotation(const Vec3& axis, double angle) {
        const Vec3 u = axis.normalized();
        const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
        Mat3 r;
        r.m[0][0] = c + u.x * u.x * t;
        r.m[0][1] = u.x * u.y * t - u.z * s;
        r.m[0][2] = u.x * u.z * t + u.y * s;
        r.m[1][0] = u.y * u.x * t + u.z * s;
        r.m[1][1] = c + u.y * u.y * t;
        r.m[1][2] = u.y * u.z * t - u.x * s;
        r.m[2][0] = u.z * u.x * t - u.y * s;
        r.m[2][1] = u.z * u.y * t + u.x * s;
        r.m[2][2] = c + u.z * u.z * t;
        return r;
    }

    Vec3 operator*(const Vec3& v) const {
        return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
                m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
                m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
    }
};

// Deterministic orthonormal completion: returns (b1, b2) with {a, b1, b2}
// right-handed orthonormal, for unit a.
inline void orthonormal_basis(const Vec3& a, Vec3& b1, Vec3& b2) {
    const Vec3 seed = (std::abs(a.x) <= std::abs(a.y) && std::abs(a.x) <= std::abs(a.z))
                          ? Vec3{1, 0, 0}
                          : (std::abs(a.y) <= std::abs(a.z) ? Vec3{0, 1, 0} : Vec3{0, 0, 1});
    b1 = cross(a, seed).normalized();
    b2 = cross(a, b1);
}

}  // namespace anosov
