#include "anosov/horizon.hpp"

#include <algorithm>
#include <cmath>

namespace anosov {

namespace {

constexpr double kTwoPi = 6.283185307179586;

struct Blocked {
    double lo, hi;  // angular interval, may wrap below 0 / above 2*pi
};

double longest_free_length(const BilliardTable& table, const UnitVec3& pole) {
    auto arcs = free_arcs_on_circle(table, pole);
    double best = 0.0;
    for (const auto& a : arcs) best = std::max(best, a.length);
    return best;
}

// True if the great circle with this pole misses every obstacle (with
// margin), checked analytically: min distance from the circle to center i is
// |pi/2 - d(pole, c_i)|.
bool circle_clears_all(const BilliardTable& table, const UnitVec3& pole, double margin = 0.0) {
    for (std::size_t i = 0; i < table.size(); ++i) {
        const double d = spherical_distance(pole, table.obstacle(i).center);
        if (std::abs(1.5707963267948966 - d) < table.obstacle(i).radius + margin) return false;
    }
    return true;
}

}  // namespace

UnitVec3 circle_point(const UnitVec3& pole, double phi) {
    Vec3 e1, e2;
    orthonormal_basis(pole.v, e1, e2);
    return UnitVec3(e1 * std::cos(phi) + e2 * std::sin(phi));
}

std::vector<FreeArc> free_arcs_on_circle(const BilliardTable& table, const UnitVec3& pole) {
    Vec3 e1, e2;
    orthonormal_basis(pole.v, e1, e2);

    std::vector<Blocked> blocked;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& obst = table.obstacle(i);
        const double a = dot(e1, obst.center.v);
        const double b = dot(e2, obst.center.v);
        const double rc = std::hypot(a, b);
        const double cr = std::cos(obst.radius);
        if (rc <= cr) continue;  // circle stays clear of this disk
        const double phi0 = std::atan2(b, a);
        const double w = std::acos(cr / rc);
        blocked.push_back({phi0 - w, phi0 + w});
    }

    if (blocked.empty()) return {{0.0, kTwoPi}};

    // Reuse the merge logic, returning every maximal free arc.
    std::vector<Blocked> segs;
    for (const auto& bl : blocked) {
        double lo = bl.lo;
        lo -= kTwoPi * std::floor(lo / kTwoPi);
        const double hi = lo + (bl.hi - bl.lo);
        if (hi <= kTwoPi) {
            segs.push_back({lo, hi});
        } else {
            segs.push_back({lo, kTwoPi});
            segs.push_back({0.0, hi - kTwoPi});
        }
    }
    std::sort(segs.begin(), segs.end(), [](const Blocked& x, const Blocked& y) { return x.lo < y.lo; });
    std::vector<Blocked> merged;
    for (const auto& s : segs) {
        if (!merged.empty() && s.lo <= merged.back().hi)
            merged.back().hi = std::max(merged.back().hi, s.hi);
        else
            merged.push_back(s);
    }

    std::vector<FreeArc> arcs;
    for (std::size_t i = 0; i < merged.size(); ++i) {
        const double gap_start = merged[i].hi;
        const double gap_end = (i + 1 < merged.size()) ? merged[i + 1].lo : merged[0].lo + kTwoPi;
        if (gap_end - gap_start > 0.0) arcs.push_back({gap_start, gap_end - gap_start});
    }
    return arcs;
}

HorizonResult horizon(const BilliardTable& table, int grid_n, int refine_iters) {
    HorizonResult res;
    res.grid_n = grid_n;
    res.refine_iters = refine_iters;
    res.grid_spacing = std::sqrt(kTwoPi / std::max(1, grid_n));

    UnitVec3 best_pole(0, 0, 1);
    double best_len = -1.0;

    // Fibonacci lattice on the upper half-sphere; poles p and -p define the
    // same circle.
    const double golden = 2.399963229728653;  // 2*pi*(1 - 1/phi)
    for (int i = 0; i < grid_n; ++i) {
        const double zc = (i + 0.5) / grid_n;  // (0, 1]
        const double r = std::sqrt(std::max(0.0, 1.0 - zc * zc));
        const double phi = golden * i;
        const UnitVec3 pole(r * std::cos(phi), r * std::sin(phi), zc);
        const double len = longest_free_length(table, pole);
        if (len > best_len) {
            best_len = len;
            best_pole = pole;
        }
    }

    // Nelder-Mead in the tangent plane of the incumbent, re-centered each
    // round. The objective is piecewise-smooth with kinks where arc endpoints
    // switch obstacles, so a simplex method is the robust choice.
    auto pole_at = [](const UnitVec3& center, const Vec3& b1, const Vec3& b2, double x, double y) {
        const double n = std::hypot(x, y);
        if (n < 1e-15) return center;
        const Vec3 dir = (b1 * x + b2 * y) / n;
        return UnitVec3(center.v * std::cos(n) + dir * std::sin(n));
    };

    double step = 1.5 * res.grid_spacing;
    for (int round = 0; round < refine_iters; ++round) {
        Vec3 b1, b2;
        orthonormal_basis(best_pole.v, b1, b2);
        struct Pt {
            double x, y, f;
        };
        auto eval = [&](double x, double y) {
            return longest_free_length(table, pole_at(best_pole, b1, b2, x, y));
        };
        Pt simplex[3] = {{0.0, 0.0, eval(0.0, 0.0)},
                         {step, 0.0, eval(step, 0.0)},
                         {0.0, step, eval(0.0, step)}};
        for (int it = 0; it < 60; ++it) {
            std::sort(simplex, simplex + 3, [](const Pt& a, const Pt& b) { return a.f > b.f; });
            const double cx = 0.5 * (simplex[0].x + simplex[1].x);
            const double cy = 0.5 * (simplex[0].y + simplex[1].y);
            const double rx = cx + (cx - simplex[2].x), ry = cy + (cy - simplex[2].y);
            const double fr = eval(rx, ry);
            if (fr > simplex[0].f) {
                const double ex = cx + 2.0 * (cx - simplex[2].x), ey = cy + 2.0 * (cy - simplex[2].y);
                const double fe = eval(ex, ey);
                simplex[2] = (fe > fr) ? Pt{ex, ey, fe} : Pt{rx, ry, fr};
            } else if (fr > simplex[1].f) {
                simplex[2] = {rx, ry, fr};
            } else {
                const double sx = cx + 0.5 * (simplex[2].x - cx), sy = cy + 0.5 * (simplex[2].y - cy);
                const double fs = eval(sx, sy);
                if (fs > simplex[2].f) {
                    simplex[2] = {sx, sy, fs};
                } else {
                    for (int j = 1; j < 3; ++j) {
                        simplex[j].x = simplex[0].x + 0.5 * (simplex[j].x - simplex[0].x);
                        simplex[j].y = simplex[0].y + 0.5 * (simplex[j].y - simplex[0].y);
                        simplex[j].f = eval(simplex[j].x, simplex[j].y);
                    }
                }
            }
        }
        std::sort(simplex, simplex + 3, [](const Pt& a, const Pt& b) { return a.f > b.f; });
        // Refinement never loses the incumbent.
        if (simplex[0].f > best_len) {
            best_len = simplex[0].f;
            best_pole = pole_at(best_pole, b1, b2, simplex[0].x, simplex[0].y);
        }
        step *= 0.35;
    }

    // Unboundedness: a fully free circle found on the grid, confirmed
    // analytically at the candidate pole.
    if (best_len >= kTwoPi - 1e-12 && circle_clears_all(table, best_pole)) {
        res.unbounded = true;
        res.H = kTwoPi;
        res.pole = best_pole;
        res.arc_start = 0.0;
        res.arc_end = kTwoPi;
        return res;
    }

    auto arcs = free_arcs_on_circle(table, best_pole);
    FreeArc best_arc{0.0, 0.0};
    for (const auto& a : arcs)
        if (a.length > best_arc.length) best_arc = a;

    res.unbounded = false;
    res.H = best_arc.length;
    res.pole = best_pole;
    res.arc_start = best_arc.start;
    res.arc_end = best_arc.start + best_arc.length;
    return res;
}

}  // namespace anosov
