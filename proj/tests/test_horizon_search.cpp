#include <cmath>

#include "anosov/horizon.hpp"
#include "anosov/rng.hpp"
#include "doctest.h"

using namespace anosov;

namespace {

constexpr double kPi = 3.141592653589793;
constexpr double kTwoPi = 6.283185307179586;

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

// Sampling-based free-arc oracle: mark N circle samples blocked/free and take
// the longest circular run of free samples.
double sampled_longest_free(const BilliardTable& table, const UnitVec3& pole, int n) {
    std::vector<char> free_mask(n);
    for (int i = 0; i < n; ++i) {
        const UnitVec3 p = circle_point(pole, kTwoPi * i / n);
        bool free_pt = true;
        for (std::size_t m = 0; m < table.size() && free_pt; ++m)
            if (spherical_distance(p, table.obstacle(m).center) < table.obstacle(m).radius)
                free_pt = false;
        free_mask[i] = free_pt;
    }
    int first_blocked = -1;
    for (int i = 0; i < n; ++i)
        if (!free_mask[i]) {
            first_blocked = i;
            break;
        }
    if (first_blocked < 0) return kTwoPi;
    int run = 0, best = 0;
    for (int k = 0; k < n; ++k) {
        if (free_mask[(first_blocked + 1 + k) % n])
            best = std::max(best, ++run);
        else
            run = 0;
    }
    return kTwoPi * best / n;
}

}  // namespace

TEST_CASE("free_arcs_on_circle closed-form cases") {
    // Pole orthogonal to the obstacle center: the circle passes through the
    // center and the blocked width is exactly 2r (dense sampling agrees).
    const BilliardTable table = validate_table({{UnitVec3(1, 0, 0), 0.3}});
    const UnitVec3 pole(0, 0, 1);
    const auto arcs = free_arcs_on_circle(table, pole);
    REQUIRE(arcs.size() == 1);
    CHECK(std::abs(arcs[0].length - (kTwoPi - 0.6)) < 1e-12);
    CHECK(std::abs(sampled_longest_free(table, pole, 200000) - arcs[0].length) < 1e-4);

    // Pole at the obstacle center: the circle stays at distance pi/2 > r.
    const auto clear = free_arcs_on_circle(table, UnitVec3(1, 0, 0));
    REQUIRE(clear.size() == 1);
    CHECK(clear[0].length == kTwoPi);

    // Two obstacles symmetric about the circle: two equal free arcs.
    const BilliardTable pair =
        validate_table({{UnitVec3(1, 0, 0), 0.3}, {UnitVec3(-1, 0, 0), 0.3}});
    const auto two = free_arcs_on_circle(pair, pole);
    REQUIRE(two.size() == 2);
    CHECK(std::abs(two[0].length - two[1].length) < 1e-12);
    CHECK(std::abs(two[0].length - (kPi - 0.6)) < 1e-12);
}

TEST_CASE("free arcs agree with dense sampling on random poles") {
    const BilliardTable table = icosahedron_table(0.5);
    Rng rng(19);
    for (int i = 0; i < 40; ++i) {
        const UnitVec3 pole = rng.unit_vector();
        const auto arcs = free_arcs_on_circle(table, pole);
        double best = 0.0;
        for (const auto& a : arcs) best = std::max(best, a.length);
        CHECK(std::abs(best - sampled_longest_free(table, pole, 20000)) < 1.5e-3);
    }
}

TEST_CASE("horizon: single obstacle is unbounded") {
    const BilliardTable one = validate_table({{UnitVec3(0.3, -0.5, 0.8), 0.4}});
    const HorizonResult res = horizon(one, 500, 0);
    CHECK(res.unbounded);
}

TEST_CASE("horizon matches a brute-force oracle on the icosahedron") {
    const BilliardTable table = icosahedron_table(0.55);
    const HorizonResult res = horizon(table, 20000, 8);
    REQUIRE(!res.unbounded);

    // Independent oracle: a rotated pole lattice with sampling-based arcs.
    const Mat3 R = Mat3::rotation(Vec3(1.0, 0.3, -0.2), 0.7321);
    const double golden = 2.399963229728653;
    double oracle = 0.0;
    const int grid = 20000;
    for (int i = 0; i < grid; ++i) {
        const double zc = (i + 0.5) / grid;
        const double rr = std::sqrt(std::max(0.0, 1.0 - zc * zc));
        const double phi = golden * i;
        const UnitVec3 pole(R * Vec3(rr * std::cos(phi), rr * std::sin(phi), zc));
        oracle = std::max(oracle, sampled_longest_free(table, pole, 2048));
    }
    CHECK(std::abs(res.H - oracle) < 0.01);

    // The reported arc is genuinely free at 256 samples.
    for (int i = 0; i < 256; ++i) {
        const double phi = res.arc_start + (res.arc_end - res.arc_start) * (i + 0.5) / 256.0;
        const UnitVec3 p = circle_point(res.pole, phi);
        for (std::size_t m = 0; m < table.size(); ++m)
            CHECK(table.obstacle(m).radius - spherical_distance(p, table.obstacle(m).center) <
                  1e-8);
    }
}

TEST_CASE("horizon monotonicity under radius growth, refinement keeps incumbent") {
    const BilliardTable base = icosahedron_table(0.50);
    std::vector<SphericalCircle> bigger;
    for (const auto& o : base.obstacles()) bigger.push_back({o.center, o.radius + 0.01});
    const BilliardTable grown = validate_table(bigger);

    const HorizonResult a0 = horizon(base, 4000, 0);
    const HorizonResult b0 = horizon(grown, 4000, 0);
    CHECK(b0.H <= a0.H);  // exact for the coarse pass on the same grid

    const HorizonResult a5 = horizon(base, 4000, 5);
    CHECK(a5.H >= a0.H);

    const HorizonResult b5 = horizon(grown, 4000, 5);
    CHECK(b5.H <= a5.H + 1e-6);
}

TEST_CASE("icosahedron family: R + H_R stays below pi/2") {
    for (const double R : {0.545, 0.550, 0.553}) {
        const HorizonResult res = horizon(icosahedron_table(R), 6000, 6);
        REQUIRE(!res.unbounded);
        CHECK(R + res.H < kPi / 2);
    }
}
