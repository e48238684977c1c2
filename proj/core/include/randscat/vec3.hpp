#pragma once

#include <array>
#include <cmath>
#include <vector>

namespace randscat {

using Vec3 = std::array<double, 3>;
using Idx3 = std::array<int, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline Vec3 operator-(const Vec3& a) { return {-a[0], -a[1], -a[2]}; }

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 normalized(const Vec3& a) {
    const double n = norm(a);
    return {a[0] / n, a[1] / n, a[2] / n};
}

inline bool is_unit(const Vec3& a, double tol = 1e-12) { return std::abs(norm(a) - 1.0) <= tol; }

inline bool all_finite(const Vec3& a) {
    return std::isfinite(a[0]) && std::isfinite(a[1]) && std::isfinite(a[2]);
}

/// Quasi-uniform direction set on the unit sphere (golden-spiral layout).
inline Vec3 fibonacci_direction(int i, int count) {
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = 2.0 * M_PI * std::fmod(i / golden, 1.0);
    return {r * std::cos(phi), r * std::sin(phi), z};
}

inline std::vector<Vec3> fibonacci_directions(int count) {
    std::vector<Vec3> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(fibonacci_direction(i, count));
    return out;
}

}  // namespace randscat
