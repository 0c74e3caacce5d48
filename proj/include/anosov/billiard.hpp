#pragma once
// Exact billiard dynamics on S^2 minus circular obstacles: closed-form
// collision detection, specular reflection, grazing detection, trajectory
// traces.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "anosov/sphere.hpp"

namespace anosov {

struct StartsInsideObstacle : std::runtime_error {
    int obstacle;
    explicit StartsInsideObstacle(int i)
        : std::runtime_error("trajectory starts inside obstacle " + std::to_string(i)),
          obstacle(i) {}
};

struct ExactlyGrazing : std::runtime_error {
    ExactlyGrazing() : std::runtime_error("reflection undefined: |<v,n>| below 1e-14") {}
};

struct CollisionEvent {
    double time{0.0};
    int obstacle_index{-1};
    UnitVec3 point;
    double incidence_sin{0.0};  // sin(theta) = |<v, n>| in [0, 1]
    bool grazing{false};
};

// Smallest t in (t_min, t_max] at which the great circle from s enters the
// open disk of one obstacle (outward-to-inward crossing chosen by the sign of
// d/dt <q(t), c>). Solved in the phase form a cos t + b sin t = cos r, so
// there is no stepping error. Returns nullopt if no obstacle is entered
// within t_max.
std::optional<CollisionEvent> next_collision(const BilliardTable& table, const TangentStateS2& s,
                                             double t_max, double t_min = 1e-12,
                                             double grazing_tol = 1e-4);

// Unit inward normal (into the billiard domain) to the obstacle boundary at a
// boundary point q, inside T_q S^2: normalize(<c,q> q - c).
UnitVec3 boundary_normal(const SphericalCircle& obstacle, const UnitVec3& q);

// Specular reflection v' = v - 2 <v,n> n at a collision point. Throws
// ExactlyGrazing when |<v,n>| < 1e-14.
TangentStateS2 reflect(const TangentStateS2& s, const CollisionEvent& at,
                       const BilliardTable& table);

struct TrajectoryTrace {
    TangentStateS2 initial;
    std::vector<CollisionEvent> events;
    std::vector<TangentStateS2> states_after;  // post-reflection states, one per event
    double total_time{0.0};
    bool stopped_grazing{false};
};

// Alternates next_collision / geodesic_flow / reflect up to t_end. Grazing
// events (incidence_sin < grazing_tol) are recorded and the trace stops
// there; a free flight with no collision within a full period 2*pi means the
// trajectory never collides again, and the trace is closed out to t_end.
TrajectoryTrace simulate(const BilliardTable& table, const TangentStateS2& s0, double t_end,
                         double grazing_tol = 1e-4);

// State on the trace at time t (exact great-circle interpolation between
// events).
TangentStateS2 trace_state_at(const TrajectoryTrace& trace, double t);

// Sampled validity check used by tests: event times strictly increasing and
// every inter-event arc stays outside all open obstacles (16 samples per arc,
// tolerance 1e-8).
bool validate_trace(const BilliardTable& table, const TrajectoryTrace& trace,
                    std::string* why = nullptr);

// CSV export with columns
// event_index,time,qx,qy,qz,vx,vy,vz,obstacle,sin_theta. Row 0 is the initial
// state (obstacle -1).
void write_trace_csv(const TrajectoryTrace& trace, const std::string& path);

}  // namespace anosov
