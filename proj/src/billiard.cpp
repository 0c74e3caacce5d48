#include "anosov/billiard.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace anosov {

namespace {

constexpr double kTwoPi = 6.283185307179586;

std::optional<double> entering_time(const TangentStateS2& s, const SphericalCircle& obst,
                                    double t_min, double t_max) {
    return first_entering_crossing(s.q.v, s.v.v, obst.center.v, std::cos(obst.radius), t_min,
                                   t_max);
}

}  // namespace

UnitVec3 boundary_normal(const SphericalCircle& obstacle, const UnitVec3& q) {
    const double cq = dot(obstacle.center.v, q.v);
    return UnitVec3(q.v * cq - obstacle.center.v);
}

std::optional<CollisionEvent> next_collision(const BilliardTable& table, const TangentStateS2& s,
                                             double t_max, double t_min, double grazing_tol) {
    const int inside = table.containing_obstacle(s.q, 1e-12);
    if (inside >= 0) throw StartsInsideObstacle(inside);

    std::optional<CollisionEvent> best;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto t = entering_time(s, table.obstacle(i), t_min, t_max);
        if (!t) continue;
        if (best && best->time <= *t) continue;
        CollisionEvent ev;
        ev.time = *t;
        ev.obstacle_index = static_cast<int>(i);
        const TangentStateS2 hit = geodesic_flow(s, *t);
        ev.point = hit.q;
        const UnitVec3 n = boundary_normal(table.obstacle(i), hit.q);
        ev.incidence_sin = std::abs(dot(hit.v.v, n.v));
        ev.grazing = ev.incidence_sin < grazing_tol;
        best = ev;
    }
    return best;
}

TangentStateS2 reflect(const TangentStateS2& s, const CollisionEvent& at,
                       const BilliardTable& table) {
    const UnitVec3 n = boundary_normal(table.obstacle(at.obstacle_index), s.q);
    const double vn = dot(s.v.v, n.v);
    if (std::abs(vn) < 1e-14) throw ExactlyGrazing();
    return TangentStateS2(s.q, s.v.v - n.v * (2.0 * vn));
}

TrajectoryTrace simulate(const BilliardTable& table, const TangentStateS2& s0, double t_end,
                         double grazing_tol) {
    TrajectoryTrace trace;
    trace.initial = s0;

    TangentStateS2 s = s0;
    double t = 0.0;
    while (t < t_end) {
        const double window = std::min(t_end - t, kTwoPi);
        const auto ev = next_collision(table, s, window, 1e-12, grazing_tol);
        if (!ev) {
            // A full free period means the great circle never meets any
            // obstacle again; either way the trace is closed out to t_end.
            break;
        }
        CollisionEvent global = *ev;
        global.time += t;
        trace.events.push_back(global);
        if (global.grazing) {
            // The billiard flow is undefined at grazing collisions; stop and
            // flag rather than guess a continuation.
            trace.states_after.push_back(geodesic_flow(s, ev->time));
            trace.total_time = global.time;
            trace.stopped_grazing = true;
            return trace;
        }
        const TangentStateS2 at_hit = geodesic_flow(s, ev->time);
        TangentStateS2 reflected = reflect(at_hit, global, table);
        trace.states_after.push_back(reflected);
        // Nudge along v' so the solved root is never re-detected.
        s = geodesic_flow(reflected, 1e-12);
        t = global.time + 1e-12;
    }
    trace.total_time = t_end;
    return trace;
}

TangentStateS2 trace_state_at(const TrajectoryTrace& trace, double t) {
    TangentStateS2 s = trace.initial;
    double t0 = 0.0;
    for (std::size_t k = 0; k < trace.events.size(); ++k) {
        if (t < trace.events[k].time) break;
        s = trace.states_after[k];
        t0 = trace.events[k].time;
    }
    return geodesic_flow(s, t - t0);
}

bool validate_trace(const BilliardTable& table, const TrajectoryTrace& trace, std::string* why) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };

    double prev = 0.0;
    for (std::size_t k = 0; k < trace.events.size(); ++k) {
        if (k > 0 && trace.events[k].time <= prev) return fail("event times not increasing");
        prev = trace.events[k].time;
        const auto& obst = table.obstacle(trace.events[k].obstacle_index);
        if (std::abs(spherical_distance(trace.events[k].point, obst.center) - obst.radius) > 1e-9)
            return fail("collision point off the obstacle circle");
    }

    // Sampled free-flight check: 16 interior points per arc.
    TangentStateS2 s = trace.initial;
    double t0 = 0.0;
    for (std::size_t k = 0; k <= trace.events.size(); ++k) {
        const double t1 = (k < trace.events.size()) ? trace.events[k].time : trace.total_time;
        for (int i = 1; i <= 16; ++i) {
            const double t = t0 + (t1 - t0) * i / 17.0;
            const UnitVec3 q = geodesic_flow(s, t - t0).q;
            for (std::size_t m = 0; m < table.size(); ++m) {
                const auto& o = table.obstacle(m);
                if (spherical_distance(q, o.center) < o.radius - 1e-8)
                    return fail("inter-event arc dips inside obstacle " + std::to_string(m));
            }
        }
        if (k < trace.events.size()) {
            s = trace.states_after[k];
            t0 = trace.events[k].time;
        }
    }
    return true;
}

void write_trace_csv(const TrajectoryTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << std::setprecision(17);
    out << "event_index,time,qx,qy,qz,vx,vy,vz,obstacle,sin_theta\n";
    const auto row = [&out](int idx, double t, const TangentStateS2& s, int obst, double sth) {
        out << idx << ',' << t << ',' << s.q.x() << ',' << s.q.y() << ',' << s.q.z() << ','
            << s.v.x() << ',' << s.v.y() << ',' << s.v.z() << ',' << obst << ',' << sth << '\n';
    };
    row(0, 0.0, trace.initial, -1, 0.0);
    for (std::size_t k = 0; k < trace.events.size(); ++k)
        row(static_cast<int>(k) + 1, trace.events[k].time, trace.states_after[k],
            trace.events[k].obstacle_index, trace.events[k].incidence_sin);
}

}  // namespace anosov
