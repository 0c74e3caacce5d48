#include <cmath>

#include "anosov/rng.hpp"
#include "anosov/sphere.hpp"
#include "doctest.h"

using namespace anosov;

namespace {
constexpr double kPi = 3.141592653589793;
constexpr double kHalfPi = 1.5707963267948966;
}  // namespace

TEST_CASE("geodesic_flow quarter great circle and identity") {
    const TangentStateS2 s(UnitVec3(0, 0, 1), Vec3(1, 0, 0));

    const TangentStateS2 quarter = geodesic_flow(s, kHalfPi);
    CHECK(std::abs(quarter.q.x() - 1.0) < 1e-15);
    CHECK(std::abs(quarter.q.y()) < 1e-15);
    CHECK(std::abs(quarter.q.z()) < 1e-15);
    CHECK(std::abs(quarter.v.z() + 1.0) < 1e-15);

    const TangentStateS2 same = geodesic_flow(s, 0.0);
    CHECK(std::abs(same.q.z() - 1.0) < 1e-15);
    CHECK(std::abs(same.v.x() - 1.0) < 1e-15);
}

TEST_CASE("geodesic_flow matches the closed form at t = 0.3") {
    // Independent high-precision evaluation of the closed form with long
    // double arithmetic.
    const long double t = 0.3L;
    const long double qx = std::sin(t), qz = std::cos(t);

    const TangentStateS2 s(UnitVec3(0, 0, 1), Vec3(1, 0, 0));
    const TangentStateS2 out = geodesic_flow(s, 0.3);
    CHECK(std::abs(out.q.x() - static_cast<double>(qx)) < 1e-15);
    CHECK(std::abs(out.q.y()) < 1e-15);
    CHECK(std::abs(out.q.z() - static_cast<double>(qz)) < 1e-15);
}

TEST_CASE("geodesic_flow additivity, orthogonality and norms") {
    Rng rng(42);
    for (int i = 0; i < 2000; ++i) {
        const UnitVec3 q = rng.unit_vector();
        Vec3 b1, b2;
        orthonormal_basis(q.v, b1, b2);
        const double a = rng.uniform(0.0, 2.0 * kPi);
        const TangentStateS2 s(q, b1 * std::cos(a) + b2 * std::sin(a));
        const double t1 = rng.uniform(-10.0, 10.0);
        const double t2 = rng.uniform(-10.0, 10.0);

        const TangentStateS2 two_step = geodesic_flow(geodesic_flow(s, t1), t2);
        const TangentStateS2 one_step = geodesic_flow(s, t1 + t2);
        CHECK((two_step.q.v - one_step.q.v).norm() < 1e-10);
        CHECK((two_step.v.v - one_step.v.v).norm() < 1e-10);
    }
}

TEST_CASE("geodesic_flow preserves the phase-space invariants in bulk") {
    Rng rng(7);
    double worst_dot = 0.0, worst_norm = 0.0;
    for (int i = 0; i < 1000000; ++i) {
        const UnitVec3 q = rng.unit_vector();
        Vec3 b1, b2;
        orthonormal_basis(q.v, b1, b2);
        const TangentStateS2 s(q, b1);
        const TangentStateS2 out = geodesic_flow(s, rng.uniform(-10.0, 10.0));
        worst_dot = std::max(worst_dot, std::abs(dot(out.q.v, out.v.v)));
        worst_norm = std::max({worst_norm, std::abs(out.q.v.norm() - 1.0),
                               std::abs(out.v.v.norm() - 1.0)});
    }
    CHECK(worst_dot < 1e-12);
    CHECK(worst_norm < 1e-12);
}

TEST_CASE("spherical_distance endpoints and triangle inequality") {
    const UnitVec3 a(0, 0, 1), b(1, 0, 0);
    CHECK(spherical_distance(a, a) == 0.0);
    CHECK(std::abs(spherical_distance(a, UnitVec3(0, 0, -1)) - kPi) < 1e-15);
    CHECK(std::abs(spherical_distance(a, b) - kHalfPi) < 1e-15);

    Rng rng(3);
    for (int i = 0; i < 5000; ++i) {
        const UnitVec3 x = rng.unit_vector(), y = rng.unit_vector(), z = rng.unit_vector();
        CHECK(spherical_distance(x, y) == spherical_distance(y, x));
        CHECK(spherical_distance(x, z) <= spherical_distance(x, y) + spherical_distance(y, z) + 1e-12);
    }
}

TEST_CASE("obstacle_geodesic_curvature values") {
    CHECK(std::abs(obstacle_geodesic_curvature({UnitVec3(0, 0, 1), kPi / 4}) - 1.0) < 1e-15);

    // High-precision cot evaluation.
    const long double cot03 = std::cos(0.3L) / std::sin(0.3L);
    CHECK(std::abs(obstacle_geodesic_curvature({UnitVec3(0, 0, 1), 0.3}) -
                   static_cast<double>(cot03)) < 1e-14);
    CHECK(std::abs(static_cast<double>(cot03) - 3.232728) < 1e-6);

    // Monotone decreasing toward 0+ as radius -> pi/2.
    double prev = obstacle_geodesic_curvature({UnitVec3(0, 0, 1), 0.5});
    for (double r = 0.7; r < kHalfPi; r += 0.2) {
        const double k = obstacle_geodesic_curvature({UnitVec3(0, 0, 1), r});
        CHECK(k < prev);
        CHECK(k > 0.0);
        prev = k;
    }
    CHECK(obstacle_geodesic_curvature({UnitVec3(0, 0, 1), kHalfPi - 1e-9}) < 1e-8);
}

TEST_CASE("validate_table accepts disjoint and rejects overlapping") {
    const UnitVec3 c1(0, 0, 1);
    const UnitVec3 c2(std::sin(1.2), 0, std::cos(1.2));
    CHECK_NOTHROW(validate_table({{c1, 0.5}, {c2, 0.5}}));

    const UnitVec3 c3(std::sin(0.9), 0, std::cos(0.9));
    CHECK_THROWS_AS(validate_table({{c1, 0.5}, {c3, 0.5}}), OverlappingObstacles);

    CHECK_THROWS_AS(validate_table({{c1, 0.0}}), RadiusOutOfRange);
    CHECK_THROWS_AS(validate_table({{c1, kHalfPi}}), RadiusOutOfRange);
    CHECK_THROWS_AS(validate_table(std::vector<SphericalCircle>{}), std::invalid_argument);
}

TEST_CASE("table caches distances, max radius and min gap") {
    const UnitVec3 c1(0, 0, 1);
    const UnitVec3 c2(std::sin(1.2), 0, std::cos(1.2));
    const BilliardTable table = validate_table({{c1, 0.5}, {c2, 0.4}});
    CHECK(std::abs(table.pairwise_distance(0, 1) - 1.2) < 1e-12);
    CHECK(table.max_radius() == 0.5);
    CHECK(std::abs(table.min_gap() - 0.3) < 1e-12);
    CHECK(table.containing_obstacle(UnitVec3(0, 0, 1)) == 0);
    CHECK(table.containing_obstacle(UnitVec3(0, -1, 0)) == -1);
}
