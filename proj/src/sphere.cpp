#include "anosov/sphere.hpp"

#include <cmath>
#include <limits>

namespace anosov {

std::optional<double> first_entering_crossing(const Vec3& q, const Vec3& v, const Vec3& center,
                                              double cos_threshold, double t_min, double t_max) {
    constexpr double two_pi = 6.283185307179586;
    const double a = dot(q, center);
    const double b = dot(v, center);
    const double rc = std::hypot(a, b);
    if (rc <= cos_threshold) return std::nullopt;

    // a cos t + b sin t = rc cos(t - phi); the crossing with positive
    // derivative is t = phi - acos(cos_threshold / rc) mod 2*pi.
    const double phi = std::atan2(b, a);
    const double beta = std::acos(cos_threshold / rc);
    double t = phi - beta;
    t -= two_pi * std::floor((t - t_min) / two_pi);
    if (t <= t_min) t += two_pi;
    if (t > t_max) return std::nullopt;
    return t;
}

BilliardTable validate_table(const std::vector<SphericalCircle>& obstacles) {
    if (obstacles.empty()) throw std::invalid_argument("empty obstacle list");
    constexpr double half_pi = 1.5707963267948966;
    constexpr double tol = 1e-10;

    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        const double r = obstacles[i].radius;
        if (!(r > 0.0) || !(r < half_pi)) throw RadiusOutOfRange(static_cast<int>(i));
    }

    BilliardTable table;
    table.obstacles_ = obstacles;
    const std::size_t n = obstacles.size();
    table.center_distances_.assign(n * n, 0.0);
    table.max_radius_ = 0.0;
    table.min_gap_ = std::numeric_limits<double>::infinity();

    for (std::size_t i = 0; i < n; ++i) {
        table.max_radius_ = std::max(table.max_radius_, obstacles[i].radius);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = spherical_distance(obstacles[i].center, obstacles[j].center);
            table.center_distances_[i * n + j] = d;
            table.center_distances_[j * n + i] = d;
            const double gap = d - obstacles[i].radius - obstacles[j].radius;
            if (gap <= tol) throw OverlappingObstacles(static_cast<int>(i), static_cast<int>(j));
            table.min_gap_ = std::min(table.min_gap_, gap);
        }
    }
    return table;
}

}  // namespace anosov
