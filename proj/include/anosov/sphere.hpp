#pragma once
// Exact spherical geometry primitives: points and tangent vectors on the unit
// sphere, great-circle flow, circular obstacles and their mutual relations.

#include <optional>
#include <stdexcept>
#include <vector>

#include "anosov/vec3.hpp"

namespace anosov {

// Point of S^2 subset R^3. Constructors normalize, so |q| = 1 holds to
// roundoff (the 1e-12 invariant) at all times.
struct UnitVec3 {
    Vec3 v;

    UnitVec3() : v(0, 0, 1) {}
    explicit UnitVec3(const Vec3& raw) : v(raw.normalized()) {}
    UnitVec3(double x, double y, double z) : UnitVec3(Vec3{x, y, z}) {}

    double x() const { return v.x; }
    double y() const { return v.y; }
    double z() const { return v.z; }
    operator const Vec3&() const { return v; }
};

// Phase point of the spherical billiard / great-circle flow: base point q and
// unit tangent v with <q,v> = 0. The constructor projects v onto T_q S^2 and
// renormalizes, so both invariants hold after every construction.
struct TangentStateS2 {
    UnitVec3 q;
    UnitVec3 v;

    TangentStateS2() : q(0, 0, 1), v(1, 0, 0) {}
    TangentStateS2(const UnitVec3& q_, const Vec3& v_raw)
        : q(q_), v(v_raw - q_.v * dot(v_raw, q_.v)) {}
};

// Circular obstacle: spherical disk of radius in (0, pi/2) about a unit
// center.
struct SphericalCircle {
    UnitVec3 center;
    double radius{0.0};

    SphericalCircle() = default;
    SphericalCircle(const UnitVec3& c, double r) : center(c), radius(r) {}
};

// Great-circle distance, with the dot product clamped into [-1, 1] so
// antipodal and coincident inputs never produce NaN.
inline double spherical_distance(const UnitVec3& a, const UnitVec3& b) {
    double d = dot(a.v, b.v);
    if (d > 1.0) d = 1.0;
    if (d < -1.0) d = -1.0;
    return std::acos(d);
}

// Exact great-circle motion: q(t) = q cos t + v sin t, v(t) = -q sin t + v cos t.
// Output is renormalized to suppress floating-point drift.
inline TangentStateS2 geodesic_flow(const TangentStateS2& s, double t) {
    const double c = std::cos(t), sn = std::sin(t);
    const Vec3 q = s.q.v * c + s.v.v * sn;
    const Vec3 v = s.q.v * (-sn) + s.v.v * c;
    return TangentStateS2(UnitVec3(q), v);
}

// Unsigned dispersing curvature magnitude of a circular obstacle boundary:
// cot(radius) = tan(pi/2 - radius) > 0 for radius in (0, pi/2). The paper's
// sign convention for the Riccati jump is resolved in the riccati module.
inline double obstacle_geodesic_curvature(const SphericalCircle& c) {
    return 1.0 / std::tan(c.radius);
}

struct RadiusOutOfRange : std::invalid_argument {
    int index;
    explicit RadiusOutOfRange(int i)
        : std::invalid_argument("obstacle radius out of (0, pi/2) at index " + std::to_string(i)),
          index(i) {}
};

struct OverlappingObstacles : std::invalid_argument {
    int i, j;
    OverlappingObstacles(int i_, int j_)
        : std::invalid_argument("obstacle closures intersect: " + std::to_string(i_) + ", " +
                                std::to_string(j_)),
          i(i_),
          j(j_) {}
};

// Validated billiard table: obstacles with pairwise disjoint closures.
// Construction is through validate_table below.
class BilliardTable {
  public:
    const std::vector<SphericalCircle>& obstacles() const { return obstacles_; }
    std::size_t size() const { return obstacles_.size(); }
    const SphericalCircle& obstacle(std::size_t i) const { return obstacles_[i]; }

    // A = largest obstacle radius.
    double max_radius() const { return max_radius_; }
    double pairwise_distance(std::size_t i, std::size_t j) const {
        return center_distances_[i * obstacles_.size() + j];
    }
    // Minimal gap between obstacle closures over all pairs (infinity for a
    // single obstacle).
    double min_gap() const { return min_gap_; }

    // True if q lies inside the open obstacle with the given index.
    bool inside_obstacle(const UnitVec3& q, std::size_t i, double tol = 0.0) const {
        return spherical_distance(q, obstacles_[i].center) < obstacles_[i].radius - tol;
    }
    // Index of an open obstacle containing q, or -1.
    int containing_obstacle(const UnitVec3& q, double tol = 0.0) const {
        for (std::size_t i = 0; i < obstacles_.size(); ++i)
            if (inside_obstacle(q, i, tol)) return static_cast<int>(i);
        return -1;
    }

    friend BilliardTable validate_table(const std::vector<SphericalCircle>& obstacles);

  private:
    std::vector<SphericalCircle> obstacles_;
    std::vector<double> center_distances_;
    double max_radius_{0.0};
    double min_gap_{0.0};
};

// Accepts iff every radius lies in (0, pi/2) and for all i != j the closures
// are strictly disjoint: distance(c_i, c_j) > r_i + r_j (tolerance 1e-10).
BilliardTable validate_table(const std::vector<SphericalCircle>& obstacles);

// Smallest t in (t_min, t_max] at which the great circle q cos t + v sin t
// crosses <q(t), c> = cos_threshold from below (entering the spherical cap
// around c). Closed form via the phase representation; nullopt if the circle
// never reaches the cap or no crossing lies in the window.
std::optional<double> first_entering_crossing(const Vec3& q, const Vec3& v, const Vec3& center,
                                              double cos_threshold, double t_min, double t_max);

}  // namespace anosov
