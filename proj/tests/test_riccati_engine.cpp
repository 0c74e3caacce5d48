#include <cmath>

#include "anosov/riccati.hpp"
#include "anosov/rng.hpp"
#include "doctest.h"

using namespace anosov;

namespace {

constexpr double kPi = 3.141592653589793;
constexpr double kHalfPi = 1.5707963267948966;

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

BilliardTable octahedron_table(double radius) {
    std::vector<SphericalCircle> obstacles;
    obstacles.push_back({UnitVec3(1, 0, 0), radius});
    obstacles.push_back({UnitVec3(-1, 0, 0), radius});
    obstacles.push_back({UnitVec3(0, 1, 0), radius});
    obstacles.push_back({UnitVec3(0, -1, 0), radius});
    obstacles.push_back({UnitVec3(0, 0, 1), radius});
    obstacles.push_back({UnitVec3(0, 0, -1), radius});
    return validate_table(obstacles);
}

}  // namespace

TEST_CASE("free_flight_riccati closed form") {
    // Independent -tan evaluation in long double.
    const double expect = static_cast<double>(-std::tan(0.5L));
    const RiccatiValue u = free_flight_riccati(RiccatiValue::of(0.0), 0.5);
    REQUIRE(u.finite);
    CHECK(std::abs(u.u - expect) < 1e-12);
    CHECK(std::abs(u.u + 0.546302) < 1e-6);

    const RiccatiValue id = free_flight_riccati(RiccatiValue::of(0.0), 0.0);
    CHECK(id.finite);
    CHECK(id.u == 0.0);

    // A quarter period brings +infinity back to zero.
    const RiccatiValue from_inf = free_flight_riccati(RiccatiValue::infinite(), kHalfPi);
    REQUIRE(from_inf.finite);
    CHECK(std::abs(from_inf.u) < 1e-12);
}

TEST_CASE("free_flight_riccati passes through blow-ups projectively") {
    // From u0 = 0 the solution blows up at t = pi/2 and re-enters from
    // +infinity.
    const RiccatiValue just_before = free_flight_riccati(RiccatiValue::of(0.0), kHalfPi - 1e-6);
    const RiccatiValue just_after = free_flight_riccati(RiccatiValue::of(0.0), kHalfPi + 1e-6);
    REQUIRE(just_before.finite);
    REQUIRE(just_after.finite);
    CHECK(just_before.u < -1e5);
    CHECK(just_after.u > 1e5);
    CHECK(!free_flight_riccati(RiccatiValue::of(0.0), kHalfPi).finite);
}

TEST_CASE("collision_jump formula, inequality chain, infinity absorption") {
    const double kappa03 = 1.0 / std::tan(0.3);
    const RiccatiValue head_on = collision_jump(RiccatiValue::of(0.0), kappa03, 1.0);
    REQUIRE(head_on.finite);
    CHECK(std::abs(head_on.u - 2.0 * kappa03) < 1e-12);
    CHECK(std::abs(head_on.u - 6.465456) < 1e-5);

    // The proof chain of the hyperbolicity condition: with H = 0.93 and
    // A = 0.55, u- = -tan(H) jumps above 2 cot(A) - tan(H) > 0.
    const double H = 0.93, A = 0.55;
    const RiccatiValue after = collision_jump(RiccatiValue::of(-std::tan(H)), 1.0 / std::tan(A), 1.0);
    REQUIRE(after.finite);
    const double m = 2.0 / std::tan(A) - std::tan(H);
    CHECK(std::abs(after.u - m) < 1e-12);
    CHECK(after.u > 1.9);

    CHECK(!collision_jump(RiccatiValue::infinite(), kappa03, 0.7).finite);
    CHECK_THROWS_AS(collision_jump(RiccatiValue::of(0.0), kappa03, 1e-5), GrazingJump);
}

TEST_CASE("billiard_riccati_trace composes flights and jumps") {
    const BilliardTable two = validate_table({{UnitVec3(0, 0, 1), 0.4}, {UnitVec3(0, 0, -1), 0.4}});
    const TangentStateS2 axis_orbit(UnitVec3(1, 0, 0), Vec3(0, 0, 1));
    const TrajectoryTrace bounce = simulate(two, axis_orbit, 10.0);
    REQUIRE(bounce.events.size() >= 3);

    const BilliardRiccatiTrace ric(bounce, two, 0.0, RiccatiValue::of(0.0));

    // Step-by-step hand composition of the two closed forms over one period
    // (two collisions) starting from the first collision.
    const double kappa = 1.0 / std::tan(0.4);
    const double t0 = bounce.events[0].time;
    const double flight = bounce.events[1].time - bounce.events[0].time;
    RiccatiValue by_hand = ric.at(t0);  // post-jump at the first collision
    by_hand = free_flight_riccati(by_hand, flight);
    by_hand = collision_jump(by_hand, kappa, 1.0);
    by_hand = free_flight_riccati(by_hand, flight);
    by_hand = collision_jump(by_hand, kappa, 1.0);

    const double t_period_end = bounce.events[2].time;
    const RiccatiValue traced = ric.at(t_period_end);
    REQUIRE(traced.finite);
    REQUIRE(by_hand.finite);
    CHECK(std::abs(traced.u - by_hand.u) < 1e-9);

    // Zero-collision trace: pure -tan.
    const BilliardTable one = validate_table({{UnitVec3(0, 0, 1), 0.4}});
    const TangentStateS2 equator(UnitVec3(1, 0, 0), Vec3(0, 1, 0));
    const TrajectoryTrace free_trace = simulate(one, equator, 0.4);
    const BilliardRiccatiTrace free_ric(free_trace, one, 0.0, RiccatiValue::of(0.0));
    CHECK(std::abs(free_ric.at(0.4).u + std::tan(0.4)) < 1e-12);

    // Starting exactly at a collision time applies the jump immediately.
    const BilliardRiccatiTrace at_event(bounce, two, bounce.events[0].time, RiccatiValue::of(0.0));
    const RiccatiValue jumped = collision_jump(RiccatiValue::of(0.0), kappa, 1.0);
    CHECK(std::abs(at_event.at(bounce.events[0].time).u - jumped.u) < 1e-12);

    // No blow-ups on this orbit: after the first jump the tangent phase
    // stays inside (-pi/2, pi/2) over each flight.
    CHECK(ric.blowup_times().empty());

    // A collision-free stretch longer than pi/2 from u0 = 0 does blow up.
    const TrajectoryTrace long_free = simulate(one, equator, 2.0);
    const BilliardRiccatiTrace blow(long_free, one, 0.0, RiccatiValue::of(0.0));
    REQUIRE(blow.blowup_times().size() == 1);
    CHECK(std::abs(blow.blowup_times()[0] - kHalfPi) < 1e-12);
}

TEST_CASE("analytic_certificate conditions") {
    const BilliardTable table = icosahedron_table(0.55);

    HorizonResult hor;
    hor.unbounded = false;
    hor.H = 0.93;
    const AnalyticCertificate cert = analytic_certificate(table, hor);
    CHECK(cert.certified);
    CHECK(std::abs(cert.lhs - 2.0 * std::tan(kHalfPi - 0.55)) < 1e-12);
    CHECK(std::abs(cert.rhs - std::tan(0.93)) < 1e-12);
    CHECK(cert.lhs > cert.rhs);
    // Quoted reference values are loose roundings (tan(0.93) = 1.3417...).
    CHECK(std::abs(cert.lhs - 3.262062) < 1e-3);
    CHECK(std::abs(cert.rhs - 1.341310) < 1e-3);

    hor.H = 1.6;  // above pi/2: first condition fails
    CHECK(!analytic_certificate(table, hor).certified);

    // The weaker sufficient clause A + H < pi/2.
    hor.H = 1.4 - table.max_radius();
    const AnalyticCertificate sum = analytic_certificate(table, hor);
    CHECK(sum.sum_condition);
    CHECK(sum.certified);

    hor.unbounded = true;
    CHECK_THROWS_AS(analytic_certificate(table, hor), InfiniteHorizon);
}

TEST_CASE("sampled_certificate certifies the icosahedron and refutes the octahedron") {
    const BilliardTable icosa = icosahedron_table(0.55);

    // Constants from the proof chain with a conservative horizon stand-in.
    const double H = 0.94;
    CertificateParams params;
    params.m = 2.0 / std::tan(0.55) - std::tan(H) - 0.05;
    params.c = 0.5 * icosa.min_gap();
    params.C = H + 0.05;
    params.A_bound = std::tan(H) + 0.01;

    const CertificateReport rep = sampled_certificate(icosa, 400, 20.0, params, 7);
    CHECK(rep.verdict == Verdict::certified);
    CHECK(rep.samples_used > 300);
    CHECK(rep.intervals_checked > 10000);
    CHECK(rep.worst_endpoint_u > params.m);

    // Monotonicity: certifying at m implies certifying at m/2 on the same
    // sample set.
    CertificateParams half = params;
    half.m *= 0.5;
    CHECK(sampled_certificate(icosa, 400, 20.0, half, 7).verdict == Verdict::certified);

    // Empty budget.
    CHECK(sampled_certificate(icosa, 0, 20.0, params, 7).verdict == Verdict::inconclusive);

    // Octahedron with finite horizon: free flights exceed pi/2, the Riccati
    // solution from 0 blows up mid-flight, and a counterexample is found.
    const BilliardTable octa = octahedron_table(0.7);
    CertificateParams oparams;
    oparams.m = 0.5;
    oparams.c = 0.01;
    oparams.C = 2.5;
    oparams.A_bound = 2.0;
    const CertificateReport orep = sampled_certificate(octa, 400, 20.0, oparams, 7);
    CHECK(orep.verdict != Verdict::certified);
    REQUIRE(orep.first_violation.has_value());
    CHECK(orep.witness.has_value());
}

TEST_CASE("sampled_certificate is deterministic across worker counts") {
    const BilliardTable icosa = icosahedron_table(0.55);
    CertificateParams params{1.0, 0.003, 1.0, 1.4};
    const CertificateReport a = sampled_certificate(icosa, 100, 10.0, params, 99, 1);
    const CertificateReport b = sampled_certificate(icosa, 100, 10.0, params, 99, 4);
    CHECK(a.verdict == b.verdict);
    CHECK(a.samples_used == b.samples_used);
    CHECK(a.intervals_checked == b.intervals_checked);
    CHECK(a.worst_endpoint_u == b.worst_endpoint_u);
    CHECK(a.worst_lower_u == b.worst_lower_u);
}

TEST_CASE("surface_riccati_step constant-curvature closed forms") {
    const auto one = [](double) { return 1.0; };
    const JacobiPair sin_sol = surface_riccati_step({0.0, 1.0}, one, 0.0, kPi);
    CHECK(std::abs(sin_sol.j) < 1e-8);
    CHECK(std::abs(sin_sol.dj + 1.0) < 1e-8);

    const auto zero = [](double) { return 0.0; };
    const JacobiPair flat = surface_riccati_step({1.0, 0.0}, zero, 0.0, 5.0);
    CHECK(std::abs(flat.j - 1.0) < 1e-10);
    CHECK(std::abs(flat.dj) < 1e-10);

    const auto minus_one = [](double) { return -1.0; };
    const JacobiPair hyp = surface_riccati_step({1.0, 0.0}, minus_one, 0.0, 1.0);
    CHECK(std::abs(hyp.j - std::cosh(1.0)) < 1e-8);
    CHECK(std::abs(hyp.dj - std::sinh(1.0)) < 1e-8);
}

TEST_CASE("free flight matches the generic Jacobi integrator at K = 1") {
    const auto one = [](double) { return 1.0; };
    Rng rng(31);
    for (int i = 0; i < 60; ++i) {
        const double u0 = rng.uniform(-5.0, 5.0);
        const double t = rng.uniform(0.0, 1.4);
        const RiccatiValue closed = free_flight_riccati(RiccatiValue::of(u0), t);
        const JacobiPair integrated = surface_riccati_step({1.0, u0}, one, 0.0, t, 1e-12);
        const RiccatiValue via_ode = integrated.riccati();
        if (!closed.finite || std::abs(closed.u) > 1e6) continue;  // skip near blow-up
        REQUIRE(via_ode.finite);
        CHECK(std::abs(closed.u - via_ode.u) < 1e-8 * (1.0 + std::abs(closed.u)));
    }
}

TEST_CASE("projective consistency and Wronskian") {
    // Scaling (j, dj) by any nonzero lambda leaves the Riccati value
    // unchanged.
    Rng rng(41);
    for (int i = 0; i < 100; ++i) {
        const JacobiPair p{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
        if (std::abs(p.j) < 1e-3) continue;
        const double lambda = rng.uniform(0.1, 10.0) * (rng.next_double() < 0.5 ? -1.0 : 1.0);
        const JacobiPair q{lambda * p.j, lambda * p.dj};
        CHECK(std::abs(p.riccati().u - q.riccati().u) < 1e-12 * (1.0 + std::abs(p.riccati().u)));
    }

    // Wronskian of two solutions along a time-varying curvature is constant.
    const auto K = [](double t) { return 1.0 + 0.5 * std::sin(3.0 * t); };
    JacobiPair a{1.0, 0.0}, b{0.0, 1.0};
    const double w0 = a.j * b.dj - b.j * a.dj;
    for (int step = 0; step < 20; ++step) {
        const double t0 = 0.3 * step, t1 = 0.3 * (step + 1);
        a = surface_riccati_step(a, K, t0, t1, 1e-11);
        b = surface_riccati_step(b, K, t0, t1, 1e-11);
        const double w = a.j * b.dj - b.j * a.dj;
        CHECK(std::abs(w - w0) < 1e-10 * (t1 + 1.0));
    }
}

TEST_CASE("billiard Lyapunov estimates: expanding icosahedron, neutral octahedron") {
    const BilliardTable icosa = icosahedron_table(0.55);
    Rng rng(53);
    int positive = 0, tried = 0;
    for (int i = 0; i < 8; ++i) {
        try {
            const double lam = billiard_lyapunov_estimate(icosa, rng.billiard_phase_point(icosa), 200.0);
            ++tried;
            if (lam >= 0.05) ++positive;
        } catch (const std::exception&) {
        }
    }
    CHECK(tried >= 5);
    CHECK(positive == tried);

    // The symmetry-located neutral orbit of the octahedron: a meridian at
    // longitude pi/4 bouncing between the two polar caps.
    const BilliardTable octa = octahedron_table(0.7);
    const double lon = kPi / 4;
    const TangentStateS2 meridian(UnitVec3(std::cos(lon), std::sin(lon), 0.0), Vec3(0, 0, 1));
    const double lam = billiard_lyapunov_estimate(octa, meridian, 200.0);
    CHECK(std::abs(lam) <= 0.01);
}
