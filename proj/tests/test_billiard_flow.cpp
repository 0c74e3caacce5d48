#include <cmath>

#include "anosov/billiard.hpp"
#include "anosov/rng.hpp"
#include "doctest.h"

using namespace anosov;

namespace {

constexpr double kPi = 3.141592653589793;
constexpr double kHalfPi = 1.5707963267948966;

// Brute-force entering-collision oracle: scan <q(t), c> - cos r on a dense
// grid and bisect the first outside-to-inside bracket.
double oracle_first_entry(const TangentStateS2& s, const SphericalCircle& obst, double t_max,
                          double step = 1e-4) {
    const auto f = [&](double t) {
        return dot(geodesic_flow(s, t).q.v, obst.center.v) - std::cos(obst.radius);
    };
    double prev = f(0.0);
    for (double t = step; t <= t_max + step; t += step) {
        const double cur = f(t);
        if (prev <= 0.0 && cur > 0.0) {
            double lo = t - step, hi = t;
            for (int i = 0; i < 80; ++i) {
                const double mid = 0.5 * (lo + hi);
                if (f(mid) > 0.0)
                    hi = mid;
                else
                    lo = mid;
            }
            return 0.5 * (lo + hi);
        }
        prev = cur;
    }
    return -1.0;
}

BilliardTable icosahedron_table(double radius) {
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    std::vector<SphericalCircle> obstacles;
    for (const double s1 : {-1.0, 1.0})
        for (const double s2 : {-1.0, 1.0}) {
            obstacles.push_back({UnitVec3(0.0, s1, s2 * phi), radius});
            obstacles.push_back({UnitVec3(s1, s2 * phi, 0.0), radius});
            obstacles.push_back({UnitVec3(s1 * phi, 0.0, s2), radius});
        }
    return validate_table(obstacles);
}

}  // namespace

TEST_CASE("next_collision head-on and clear-miss cases") {
    const BilliardTable table = validate_table({{UnitVec3(1, 0, 0), 0.3}});
    const TangentStateS2 s(UnitVec3(0, 0, 1), Vec3(1, 0, 0));

    const auto ev = next_collision(table, s, 10.0);
    REQUIRE(ev.has_value());
    CHECK(std::abs(ev->time - (kHalfPi - 0.3)) < 1e-12);
    CHECK(std::abs(ev->incidence_sin - 1.0) < 1e-12);
    CHECK(!ev->grazing);

    const BilliardTable off = validate_table({{UnitVec3(0, -1, 0), 0.3}});
    CHECK(!next_collision(off, s, 10.0).has_value());
}

TEST_CASE("next_collision agrees with the dense-grid bisection oracle") {
    Rng rng(11);
    const TangentStateS2 s(UnitVec3(0, 0, 1), Vec3(1, 0, 0));
    int checked = 0;
    for (int i = 0; i < 150; ++i) {
        const UnitVec3 c = rng.unit_vector();
        const double r = rng.uniform(0.1, 0.6);
        if (spherical_distance(s.q, c) <= r + 0.05) continue;  // keep the start outside
        const BilliardTable table = validate_table({{c, r}});
        const auto ev = next_collision(table, s, 2.0 * kPi);
        const double oracle = oracle_first_entry(s, {c, r}, 2.0 * kPi);
        if (!ev.has_value()) {
            CHECK(oracle < 0.0);
            continue;
        }
        REQUIRE(oracle > 0.0);
        CHECK(std::abs(ev->time - oracle) < 1e-9);
        ++checked;
    }
    CHECK(checked > 20);
}

TEST_CASE("next_collision rejects a start inside an obstacle") {
    const BilliardTable table = validate_table({{UnitVec3(0, 0, 1), 0.3}});
    const TangentStateS2 s(UnitVec3(0, 0, 1), Vec3(1, 0, 0));
    CHECK_THROWS_AS(next_collision(table, s, 1.0), StartsInsideObstacle);
}

TEST_CASE("reflect: head-on reversal, grazing error, Householder oracle") {
    const SphericalCircle obst(UnitVec3(1, 0, 0), 0.3);
    const BilliardTable table = validate_table({obst});
    const TangentStateS2 s(UnitVec3(0, 0, 1), Vec3(1, 0, 0));
    const auto ev = next_collision(table, s, 10.0);
    REQUIRE(ev.has_value());

    const TangentStateS2 at_hit = geodesic_flow(s, ev->time);
    const TangentStateS2 back = reflect(at_hit, *ev, table);
    CHECK((back.v.v + at_hit.v.v).norm() < 1e-12);  // v' = -v at normal incidence

    // Exactly grazing: velocity orthogonal to the boundary normal.
    const UnitVec3 n = boundary_normal(obst, at_hit.q);
    const Vec3 tau = cross(obst.center.v, at_hit.q.v).normalized();
    CollisionEvent graze = *ev;
    const TangentStateS2 tangential(at_hit.q, tau);
    CHECK_THROWS_AS(reflect(tangential, graze, table), ExactlyGrazing);

    // Generic incidence against an independent in-plane reflection: the
    // tangential component along the circle is preserved and the normal
    // component flips.
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const double a = rng.uniform(0.1, kPi - 0.1);
        const TangentStateS2 incoming(at_hit.q, tau * std::cos(a) - n.v * std::sin(a));
        const TangentStateS2 out = reflect(incoming, *ev, table);
        const Vec3 expected = tau * (2.0 * dot(incoming.v.v, tau)) - incoming.v.v;
        CHECK((out.v.v - expected).norm() < 1e-12);
        CHECK(std::abs(dot(out.v.v, n.v) + dot(incoming.v.v, n.v)) < 1e-12);
        CHECK(std::abs(dot(out.v.v, tau) - dot(incoming.v.v, tau)) < 1e-12);
    }
}

TEST_CASE("simulate: free orbit, period-2 orbit, trace validity") {
    // One obstacle; start on the great circle equidistant from it.
    const BilliardTable one = validate_table({{UnitVec3(0, 0, 1), 0.4}});
    const TangentStateS2 equator(UnitVec3(1, 0, 0), Vec3(0, 1, 0));
    const TrajectoryTrace free_trace = simulate(one, equator, 10.0);
    CHECK(free_trace.events.empty());
    CHECK(free_trace.total_time == 10.0);

    // Two antipodal obstacles: period-2 bouncing along the axis great
    // circle, collisions spaced pi - 0.8 apart.
    const BilliardTable two = validate_table({{UnitVec3(0, 0, 1), 0.4}, {UnitVec3(0, 0, -1), 0.4}});
    const TangentStateS2 axis_orbit(UnitVec3(1, 0, 0), Vec3(0, 0, 1));
    const TrajectoryTrace bounce = simulate(two, axis_orbit, 20.0);
    REQUIRE(bounce.events.size() >= 4);
    CHECK(std::abs(bounce.events[0].time - (kHalfPi - 0.4)) < 1e-9);
    for (std::size_t k = 0; k + 1 < bounce.events.size(); ++k) {
        CHECK(std::abs((bounce.events[k + 1].time - bounce.events[k].time) - (kPi - 0.8)) < 1e-9);
        CHECK(std::abs(bounce.events[k].incidence_sin - 1.0) < 1e-9);
    }

    std::string why;
    CHECK(validate_trace(two, bounce, &why));

    // Energy and on-circle invariants.
    for (std::size_t k = 0; k < bounce.events.size(); ++k) {
        CHECK(std::abs(bounce.states_after[k].v.v.norm() - 1.0) < 1e-10);
        const auto& obst = two.obstacle(bounce.events[k].obstacle_index);
        CHECK(std::abs(spherical_distance(bounce.events[k].point, obst.center) - obst.radius) <
              1e-9);
    }
}

TEST_CASE("simulate is time reversible") {
    // Exponential error amplification bounds how long a reversal can stay at
    // 1e-7: windows are sized so hyperbolic growth stays below that.
    const BilliardTable table = icosahedron_table(0.55);
    Rng rng(17);
    int done = 0;
    for (int i = 0; i < 60 && done < 12; ++i) {
        const TangentStateS2 s0 = rng.billiard_phase_point(table);
        const TrajectoryTrace fwd = simulate(table, s0, 1.5);
        if (fwd.stopped_grazing || fwd.events.size() > 50) continue;
        const TangentStateS2 end = trace_state_at(fwd, fwd.total_time);
        const TangentStateS2 rev(end.q, -end.v.v);
        const TrajectoryTrace back = simulate(table, rev, fwd.total_time);
        if (back.stopped_grazing) continue;
        const TangentStateS2 home = trace_state_at(back, back.total_time);
        CHECK((home.q.v - s0.q.v).norm() < 1e-7);
        CHECK((home.v.v + s0.v.v).norm() < 1e-7);
        ++done;
    }
    CHECK(done >= 12);

    // Near-neutral octahedron orbits support the full 50 collisions.
    std::vector<SphericalCircle> octa;
    for (int axis = 0; axis < 3; ++axis)
        for (const double sgn : {-1.0, 1.0}) {
            Vec3 c;
            (axis == 0 ? c.x : axis == 1 ? c.y : c.z) = sgn;
            octa.push_back({UnitVec3(c), 0.7});
        }
    const BilliardTable table8 = validate_table(octa);
    const double lon = kPi / 4;
    const TangentStateS2 meridian(UnitVec3(std::cos(lon), std::sin(lon), 0.0), Vec3(0, 0, 1));
    const TrajectoryTrace fwd = simulate(table8, meridian, 80.0);
    REQUIRE(fwd.events.size() >= 45);
    REQUIRE(!fwd.stopped_grazing);
    const TangentStateS2 end = trace_state_at(fwd, fwd.total_time);
    const TrajectoryTrace back = simulate(table8, {end.q, -end.v.v}, fwd.total_time);
    const TangentStateS2 home = trace_state_at(back, back.total_time);
    CHECK((home.q.v - meridian.q.v).norm() < 1e-7);
    CHECK((home.v.v + meridian.v.v).norm() < 1e-7);
}

TEST_CASE("simulate is rotationally equivariant") {
    const Mat3 R = Mat3::rotation(Vec3(0.3, -0.7, 0.2), 1.234);
    const BilliardTable table = icosahedron_table(0.5);
    std::vector<SphericalCircle> rotated;
    for (const auto& o : table.obstacles()) rotated.push_back({UnitVec3(R * o.center.v), o.radius});
    const BilliardTable table_rot = validate_table(rotated);

    Rng rng(23);
    for (int i = 0; i < 10; ++i) {
        const TangentStateS2 s0 = rng.billiard_phase_point(table);
        const TangentStateS2 s0_rot(UnitVec3(R * s0.q.v), R * s0.v.v);
        const TrajectoryTrace a = simulate(table, s0, 3.0);
        const TrajectoryTrace b = simulate(table_rot, s0_rot, 3.0);
        REQUIRE(a.events.size() == b.events.size());
        for (std::size_t k = 0; k < a.events.size(); ++k)
            CHECK(std::abs(a.events[k].time - b.events[k].time) < 1e-9);
    }
}

TEST_CASE("mean free path matches an independent Monte-Carlo oracle") {
    const BilliardTable table = icosahedron_table(0.55);
    Rng rng(123);

    // Implementation side: time-average of inter-collision flights along
    // simulated orbits, first (uniform-measure) flight excluded.
    double sum = 0.0;
    long long count = 0;
    for (int i = 0; i < 600; ++i) {
        const TrajectoryTrace tr = simulate(table, rng.billiard_phase_point(table), 40.0);
        for (std::size_t k = 1; k < tr.events.size(); ++k) {
            sum += tr.events[k].time - tr.events[k - 1].time;
            ++count;
        }
    }
    const double mfp = sum / count;

    // Oracle: independent flights sampled from the collision measure
    // (obstacle by perimeter, uniform boundary point, cosine-weighted
    // outgoing angle), advanced by dense-grid stepping plus bisection.
    double osum = 0.0;
    long long ocount = 0;
    for (int i = 0; i < 120000; ++i) {
        const std::size_t oi = static_cast<std::size_t>(rng.uniform(0.0, table.size()));
        const auto& obst = table.obstacle(oi);
        Vec3 b1, b2;
        orthonormal_basis(obst.center.v, b1, b2);
        const double ang = rng.uniform(0.0, 2.0 * kPi);
        const Vec3 rim = b1 * std::cos(ang) + b2 * std::sin(ang);
        const UnitVec3 q(obst.center.v * std::cos(obst.radius) + rim * std::sin(obst.radius));
        const UnitVec3 n = boundary_normal(obst, q);
        const Vec3 tau = cross(obst.center.v, q.v).normalized();
        const double phi = std::asin(rng.uniform(-1.0, 1.0));  // cosine-weighted
        const TangentStateS2 out(q, n.v * std::cos(phi) + tau * std::sin(phi));

        // Dense scan for the first entry into any disk.
        const double step = 5e-3;
        double prev = -1.0;
        double hit = -1.0;
        for (double t = 1e-9; t < 2.0 * kPi; t += step) {
            double worst = -1.0;
            const UnitVec3 p = geodesic_flow(out, t).q;
            for (std::size_t m = 0; m < table.size(); ++m)
                worst = std::max(worst, dot(p.v, table.obstacle(m).center.v) -
                                            std::cos(table.obstacle(m).radius));
            if (prev <= 0.0 && worst > 0.0 && t > step) {
                double lo = t - step, hi = t;
                for (int b = 0; b < 50; ++b) {
                    const double mid = 0.5 * (lo + hi);
                    double w = -1.0;
                    const UnitVec3 pm = geodesic_flow(out, mid).q;
                    for (std::size_t m = 0; m < table.size(); ++m)
                        w = std::max(w, dot(pm.v, table.obstacle(m).center.v) -
                                            std::cos(table.obstacle(m).radius));
                    if (w > 0.0)
                        hi = mid;
                    else
                        lo = mid;
                }
                hit = 0.5 * (lo + hi);
                break;
            }
            prev = worst;
        }
        if (hit > 0.0) {
            osum += hit;
            ++ocount;
        }
    }
    const double mfp_oracle = osum / ocount;

    CHECK(std::abs(mfp - mfp_oracle) / mfp_oracle < 0.01);
}

TEST_CASE("trace CSV round trips through the filesystem") {
    const BilliardTable two = validate_table({{UnitVec3(0, 0, 1), 0.4}, {UnitVec3(0, 0, -1), 0.4}});
    const TangentStateS2 axis_orbit(UnitVec3(1, 0, 0), Vec3(0, 0, 1));
    const TrajectoryTrace bounce = simulate(two, axis_orbit, 10.0);
    CHECK_NOTHROW(write_trace_csv(bounce, "trace_test.csv"));
}
