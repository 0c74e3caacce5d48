#pragma once
// Deterministic seeded RNG streams. Each sampled orbit gets its own stream
// derived from (seed, index), so results are reproducible at any worker
// count.

#include <cstdint>

#include "anosov/sphere.hpp"

namespace anosov {

// splitmix64: tiny, fast, good enough for sampling phase points.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    Rng(std::uint64_t seed, std::uint64_t stream) : state_(mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ULL))) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // Uniform in [0, 1).
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }
    // Uniform in [a, b).
    double uniform(double a, double b) { return a + (b - a) * next_double(); }

    // Uniform point on the unit sphere.
    UnitVec3 unit_vector() {
        const double z = uniform(-1.0, 1.0);
        const double phi = uniform(0.0, 6.283185307179586);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        return UnitVec3(r * std::cos(phi), r * std::sin(phi), z);
    }

    // Uniform phase point (area x angle measure) on the billiard domain,
    // by rejection against the obstacles.
    TangentStateS2 billiard_phase_point(const BilliardTable& table) {
        for (;;) {
            const UnitVec3 q = unit_vector();
            if (table.containing_obstacle(q) >= 0) continue;
            Vec3 b1, b2;
            orthonormal_basis(q.v, b1, b2);
            const double a = uniform(0.0, 6.283185307179586);
            return TangentStateS2(q, b1 * std::cos(a) + b2 * std::sin(a));
        }
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    std::uint64_t state_;
};

}  // namespace anosov
