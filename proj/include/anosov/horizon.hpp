#pragma once
// Horizon H of a spherical billiard: length of the longest great-circle arc
// contained in the domain. Global search over great-circle poles (Fibonacci
// lattice) with exact per-circle free-arc decomposition and derivative-free
// local refinement.

#include <vector>

#include "anosov/sphere.hpp"

namespace anosov {

// Maximal free arc on one great circle: start angle and length, in the
// circle's own angular parameter.
struct FreeArc {
    double start{0.0};
    double length{0.0};
};

// Angular decomposition of the great circle with the given pole: the
// complement of all blocked intervals, as maximal arcs. An empty result means
// the circle is entirely blocked; a single arc of length 2*pi means the
// circle misses every obstacle.
std::vector<FreeArc> free_arcs_on_circle(const BilliardTable& table, const UnitVec3& pole);

// Point of the great circle with the given pole at angular parameter phi,
// using the deterministic orthonormal frame of the pole.
UnitVec3 circle_point(const UnitVec3& pole, double phi);

struct HorizonResult {
    bool unbounded{false};
    double H{0.0};
    UnitVec3 pole;
    double arc_start{0.0};
    double arc_end{0.0};
    // Diagnostics: grid resolution (mean pole spacing) of the coarse pass.
    double grid_spacing{0.0};
    int grid_n{0};
    int refine_iters{0};
};

// Maximizes the longest free arc over poles: coarse Fibonacci-lattice pass on
// the half-sphere (poles are antipodally symmetric), then Nelder-Mead
// refinement in the tangent plane of the incumbent, re-centered each round.
// The reported H is a lower bound from the best circle found; unbounded is
// set iff a circle missing all obstacles is found and confirmed.
HorizonResult horizon(const BilliardTable& table, int grid_n, int refine_iters);

}  // namespace anosov
