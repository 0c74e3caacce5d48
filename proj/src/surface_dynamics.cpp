#include "anosov/surface_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "anosov/ode.hpp"
#include "anosov/parallel.hpp"

namespace anosov {

namespace {

constexpr double kPi = 3.141592653589793;

struct SheetInfo {
    double rho, c, K;
};

SheetInfo sheet_info(const SurfaceAssembly& A, const RegionTag& tag) {
    const SheetSpec& s = tag.kind == RegionTag::sheet_inner ? A.sheet_inner : A.sheet_outer;
    return {s.rho, s.metric_radius, s.K};
}

// Frame of the junction circle point at azimuth theta around the tube axis.
struct AxisFrame {
    Vec3 w;  // radial horizontal direction at azimuth theta
    Vec3 e;  // circle direction
};

AxisFrame axis_frame(const TubeRegion& tube, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {tube.frame_b1 * c + tube.frame_b2 * s, tube.frame_b1 * (-s) + tube.frame_b2 * c};
}

// Sheet Clairaut constant about a given axis: L = c * <u x v, a>.
double sheet_clairaut(const SurfaceState& st, double c, const Vec3& axis) {
    return c * dot(cross(st.u.v, st.v.v), axis);
}

double tube_gamma_at_junction(const TubeRegion& tube, bool upper) {
    return tube.profile.at(upper ? tube.s_junction_plus : tube.s_junction_minus).gamma;
}

// Handoff: tube -> sheet at a junction.
SurfaceState tube_exit_to_sheet(const SurfaceAssembly& A, int tube_idx, double s, double theta,
                                double ps, double L) {
    const TubeRegion& tube = A.tubes[tube_idx];
    const bool upper = s > 0.0;
    SurfaceState out;
    out.region.kind = upper ? RegionTag::sheet_outer : RegionTag::sheet_inner;
    out.region.tube_index = -1;

    const double psi = tube.psi_junction;
    const AxisFrame f = axis_frame(tube, theta);
    const Vec3 a = tube.axis.v;
    const Vec3 u = a * std::cos(psi) + f.w * std::sin(psi);
    const Vec3 m = f.w * std::cos(psi) - a * std::sin(psi);  // d u / d psi

    const double v_psi = upper ? ps : -ps;  // outward on the sheet
    const double gamma_j = tube_gamma_at_junction(tube, upper);
    const double v_theta = L / gamma_j;
    out.u = UnitVec3(u);
    out.v = UnitVec3(m * v_psi + f.e * v_theta);
    // Re-orthogonalize against u.
    out.v = UnitVec3(out.v.v - out.u.v * dot(out.v.v, out.u.v));
    return out;
}

// Handoff: sheet -> tube at the junction circle of tube_idx.
SurfaceState sheet_entry_to_tube(const SurfaceAssembly& A, int tube_idx, const RegionTag& from,
                                 const UnitVec3& u, const UnitVec3& v) {
    const TubeRegion& tube = A.tubes[tube_idx];
    const bool upper = from.kind == RegionTag::sheet_outer;
    const Vec3 a = tube.axis.v;

    const double cos_psi = dot(u.v, a);
    Vec3 w = u.v - a * cos_psi;
    const double sin_psi = w.norm();
    w = w / sin_psi;
    const double theta = std::atan2(dot(w, tube.frame_b2), dot(w, tube.frame_b1));
    const Vec3 m = w * cos_psi - a * sin_psi;
    const Vec3 e = cross(a, w);

    const double v_psi = dot(v.v, m);
    const double v_theta = dot(v.v, e);

    SurfaceState out;
    out.region.kind = RegionTag::tube;
    out.region.tube_index = tube_idx;
    out.s = upper ? tube.s_junction_plus : tube.s_junction_minus;
    out.theta = theta;
    out.ps = upper ? v_psi : -v_psi;  // entering means ps moves toward the waist
    out.L = tube.profile.at(out.s).gamma * v_theta;
    return out;
}

// Closed-form Jacobi propagation under constant curvature K > 0 over time dt.
JacobiPair sheet_jacobi(const JacobiPair& j, double K, double dt) {
    const double w = std::sqrt(K);
    const double c = std::cos(w * dt), s = std::sin(w * dt);
    return {j.j * c + j.dj / w * s, -j.j * w * s + j.dj * c};
}

// Zeros of the constant-curvature Jacobi solution in (0, dt].
void sheet_jacobi_zeros(const JacobiPair& j, double K, double dt, double t_base,
                        std::vector<double>& out) {
    const double w = std::sqrt(K);
    // j(tau) = 0  <=>  tan(w tau) = -j w / dj.
    double tau = std::atan2(-j.j * w, j.dj) / w;
    const double period = kPi / w;
    tau -= period * std::floor(tau / period);
    if (tau < 1e-14) tau += period;
    for (; tau <= dt; tau += period) out.push_back(t_base + tau);
}

struct AdvanceOutput {
    GeodesicPath path;
    JacobiPair jac{1.0, 0.0};
    double log_scale{0.0};
    std::vector<double> conj_times;
};

// Core region-by-region advance; optionally carries a Jacobi pair and
// records its zeros.
AdvanceOutput advance_core(const SurfaceAssembly& A, SurfaceState st, double t_end, double tol,
                           bool with_jacobi, JacobiPair j0,
                           std::vector<JacobiSample>* samples, double sample_dt) {
    AdvanceOutput out;
    out.jac = j0;
    double t = 0.0;
    double next_sample = 0.0;

    const auto take_sample = [&](double time, double jval, double djval) {
        if (!samples || sample_dt <= 0.0) return;
        if (time + 1e-15 >= next_sample) {
            const double sc = std::exp(out.log_scale);
            samples->push_back({time, jval * sc, djval * sc});
            next_sample += sample_dt;
        }
    };
    take_sample(0.0, out.jac.j, out.jac.dj);

    int guard = 0;
    while (t < t_end - 1e-13) {
        if (++guard > 2000000) throw std::runtime_error("advance: segment guard tripped");

        PathSegment seg;
        seg.region = st.region;
        seg.t0 = t;
        seg.entry = st;

        if (st.region.on_sheet()) {
            const SheetInfo info = sheet_info(A, st.region);
            const double phi_max = (t_end - t) / info.c;

            int hit_tube = -1;
            double phi_hit = phi_max;
            for (std::size_t i = 0; i < A.tubes.size(); ++i) {
                const auto cross_phi =
                    first_entering_crossing(st.u.v, st.v.v, A.tubes[i].axis.v,
                                            std::cos(A.tubes[i].psi_junction), 1e-12, phi_hit);
                if (cross_phi) {
                    phi_hit = *cross_phi;
                    hit_tube = static_cast<int>(i);
                }
            }
            const double dt = (hit_tube >= 0 ? phi_hit * info.c : t_end - t);

            if (with_jacobi) {
                sheet_jacobi_zeros(out.jac, info.K, dt, t, out.conj_times);
                if (samples && sample_dt > 0.0) {
                    for (double ts = next_sample; ts < t + dt; ts += sample_dt) {
                        const JacobiPair jj = sheet_jacobi(out.jac, info.K, ts - t);
                        take_sample(ts, jj.j, jj.dj);
                    }
                }
                out.jac = sheet_jacobi(out.jac, info.K, dt);
            }

            // Clairaut about the axis of the tube being entered (exact here).
            const Vec3 ref_axis =
                (hit_tube >= 0 ? A.tubes[hit_tube].axis.v : A.tubes[0].axis.v);
            seg.clairaut.L = sheet_clairaut(st, info.c, ref_axis);

            const TangentStateS2 flow0(st.u, st.v.v);
            const TangentStateS2 flow1 = geodesic_flow(flow0, dt / info.c);
            st.u = flow1.q;
            st.v = flow1.v;
            seg.clairaut.drift =
                std::abs(sheet_clairaut(st, info.c, ref_axis) - seg.clairaut.L);
            seg.t1 = t + dt;
            t = seg.t1;
            out.path.segments.push_back(seg);

            if (hit_tube >= 0) st = sheet_entry_to_tube(A, hit_tube, st.region, st.u, st.v);
            continue;
        }

        // Tube region: integrate (s, ps, theta, j, dj) with junction events.
        const TubeRegion& tube = A.tubes[st.region.tube_index];
        const double L = st.L;
        const double s_hi = tube.s_junction_plus;
        const double s_lo = tube.s_junction_minus;
        const double dom_lo = tube.profile.s_min();
        const double dom_hi = tube.profile.s_max();
        seg.ps_entry = st.ps;
        seg.clairaut.L = L;

        const std::function<void(double, const OdeState<5>&, OdeState<5>&)> rhs =
            [&](double, const OdeState<5>& y, OdeState<5>& dy) {
                const double s_clamped = std::min(std::max(y[0], dom_lo), dom_hi);
                const ProfileSample p = tube.profile.at(s_clamped);
                dy[0] = y[1];
                dy[1] = L * L * p.dgamma / (p.gamma * p.gamma * p.gamma);
                dy[2] = L / (p.gamma * p.gamma);
                dy[3] = y[4];
                dy[4] = -p.K * y[3];
            };

        OdeState<5> y{st.s, st.ps, st.theta, out.jac.j, out.jac.dj};
        double drift = 0.0;
        double unit_err = 0.0;
        bool exited = false;

        // The flattened waist concentrates curvature into an arclength layer
        // of the order of the (flattened) waist-arc piece; cap steps by the
        // distance to the waist so the spike is never stepped over.
        const double waist_scale = std::max(tube.profile.piece_end_s(0), 1e-9);
        const std::function<double(double, const OdeState<5>&)> max_step =
            [waist_scale](double, const OdeState<5>& yv) {
                const double v = std::max(std::abs(yv[1]), 1e-3);
                return (waist_scale + 0.25 * std::abs(yv[0])) / v;
            };

        const std::function<double(const DenseSegment<5>&)> on_step =
            [&](const DenseSegment<5>& dseg) {
                const OdeState<5> y0 = dseg.eval(dseg.t0);
                const OdeState<5> y1 = dseg.eval(dseg.t1());
                double tc = std::numeric_limits<double>::quiet_NaN();

                if (y0[0] <= s_hi && y1[0] > s_hi) {
                    tc = bisect_segment<5>(
                        dseg, [&](const OdeState<5>& v) { return v[0] - s_hi; }, dseg.t0,
                        dseg.t1());
                    exited = true;
                } else if (y0[0] >= s_lo && y1[0] < s_lo) {
                    tc = bisect_segment<5>(
                        dseg, [&](const OdeState<5>& v) { return v[0] - s_lo; }, dseg.t0,
                        dseg.t1());
                    exited = true;
                }

                const double t_stop = std::isnan(tc) ? dseg.t1() : tc;
                if (with_jacobi) {
                    // Jacobi zero in [t0, t_stop]? (A start at j = 0 is the
                    // field's own initial zero, not a conjugate point.)
                    const double ja = dseg.eval(dseg.t0)[3];
                    const double jb = dseg.eval(t_stop)[3];
                    if ((ja <= 0.0) != (jb <= 0.0)) {
                        const double tz = bisect_segment<5>(
                            dseg, [&](const OdeState<5>& v) { return v[3]; }, dseg.t0, t_stop);
                        if (tz > 1e-9) out.conj_times.push_back(tz);
                    }
                    if (samples && sample_dt > 0.0) {
                        for (double ts = next_sample; ts < t_stop; ts += sample_dt) {
                            const OdeState<5> yv = dseg.eval(ts);
                            take_sample(ts, yv[3], yv[4]);
                        }
                    }
                }

                // Clairaut recomputed from the evolved state, and the
                // unit-speed residual.
                const double s_cl = std::min(std::max(y1[0], dom_lo), dom_hi);
                const double g = tube.profile.at(s_cl).gamma;
                const double vtheta2 = std::max(0.0, 1.0 - y1[1] * y1[1]);
                drift = std::max(drift, std::abs(g * std::sqrt(vtheta2) - std::abs(L)));
                unit_err = std::max(unit_err,
                                    std::abs(y1[1] * y1[1] + L * L / (g * g) - 1.0));
                return tc;
            };

        const double t_reached = integrate_ode<5>(rhs, y, t, t_end, tol, on_step, max_step);

        st.s = y[0];
        st.ps = y[1];
        st.theta = y[2];
        out.jac.j = y[3];
        out.jac.dj = y[4];
        seg.clairaut.drift = drift;
        seg.t1 = t_reached;
        t = t_reached;
        out.path.worst_unit_speed_error =
            std::max(out.path.worst_unit_speed_error, unit_err);
        out.path.segments.push_back(seg);

        if (exited) {
            st = tube_exit_to_sheet(A, st.region.tube_index, st.s, st.theta, st.ps, L);
        } else if (t < t_end - 1e-13) {
            // Neither exit nor window end: should not happen.
            throw std::runtime_error("tube integration stalled");
        }

        // Renormalize the Jacobi pair between segments.
        if (with_jacobi) {
            const double mag = std::max(std::abs(out.jac.j), std::abs(out.jac.dj));
            if (mag > 1e50) {
                out.jac.j /= mag;
                out.jac.dj /= mag;
                out.log_scale += std::log(mag);
            }
        }
    }

    out.path.final_state = st;
    out.path.t_end = t;
    for (const auto& sgm : out.path.segments)
        out.path.total_clairaut_drift += sgm.clairaut.drift;
    return out;
}

}  // namespace

SurfaceState make_sheet_state(bool outer, const UnitVec3& u, const Vec3& v) {
    SurfaceState st;
    st.region.kind = outer ? RegionTag::sheet_outer : RegionTag::sheet_inner;
    st.u = u;
    st.v = UnitVec3(v - u.v * dot(v, u.v));
    return st;
}

SurfaceState make_tube_state(const SurfaceAssembly& assembly, int tube, double s, double theta,
                             double direction_angle) {
    SurfaceState st;
    st.region.kind = RegionTag::tube;
    st.region.tube_index = tube;
    st.s = s;
    st.theta = theta;
    st.ps = std::cos(direction_angle);
    st.L = assembly.tubes[tube].profile.at(s).gamma * std::sin(direction_angle);
    return st;
}

Vec3 state_position(const SurfaceAssembly& assembly, const SurfaceState& state) {
    if (state.region.on_sheet()) {
        const SheetInfo info = sheet_info(assembly, state.region);
        return state.u.v * info.rho;
    }
    const TubeRegion& tube = assembly.tubes[state.region.tube_index];
    const ProfileSample p = tube.profile.at(state.s);
    Jet2 psi, rho;
    chart_to_axis(Jet2::constant(p.r), Jet2::constant(p.z), psi, rho);
    const AxisFrame f = axis_frame(tube, state.theta);
    return (tube.axis.v * std::cos(psi.f) + f.w * std::sin(psi.f)) * rho.f;
}

GeodesicPath integrate_geodesic(const SurfaceAssembly& assembly, const SurfaceState& s0,
                                double t_end, double tol) {
    return advance_core(assembly, s0, t_end, tol, false, {1.0, 0.0}, nullptr, 0.0).path;
}

SurfaceState path_state_at(const SurfaceAssembly& assembly, const GeodesicPath& path, double t,
                           double tol) {
    const PathSegment* seg = &path.segments.front();
    for (const auto& s : path.segments)
        if (s.t0 <= t + 1e-15) seg = &s;
    const double dt = std::max(0.0, t - seg->t0);
    if (dt <= 1e-15) return seg->entry;
    AdvanceOutput out =
        advance_core(assembly, seg->entry, dt, tol, false, {1.0, 0.0}, nullptr, 0.0);
    return out.path.final_state;
}

JacobiPath jacobi_along(const SurfaceAssembly& assembly, const SurfaceState& s0, double t_end,
                        const JacobiPair& j0, double tol, double sample_dt) {
    JacobiPath jp;
    std::vector<JacobiSample> samples;
    AdvanceOutput out = advance_core(assembly, s0, t_end, tol, true, j0,
                                     sample_dt > 0.0 ? &samples : nullptr, sample_dt);
    jp.path = out.path;
    jp.final = out.jac;
    jp.log_scale = out.log_scale;
    jp.conjugate_times = out.conj_times;
    jp.samples = std::move(samples);
    return jp;
}

double surface_lyapunov_estimate(const SurfaceAssembly& assembly, const SurfaceState& s0,
                                 double t_end, double tol) {
    const JacobiPath jp = jacobi_along(assembly, s0, t_end, {1.0, 0.0}, tol);
    return (std::log(std::hypot(jp.final.j, jp.final.dj)) + jp.log_scale) / t_end;
}

namespace {

// Shared 8-state integration for conjugate-point scans: geodesic + two
// Jacobi fields + the K quadrature.
struct ConjugateScan {
    double t2{-1.0}, t1{-1.0};
    double intK_at_t2{0.0};
    std::optional<double> zero_field10;  // (1,0) field: u(0) = 0
    std::optional<double> zero_field01;  // (0,1) field
    OdeState<8> y{};
    double t_reached{0.0};
};

ConjugateScan conjugate_scan(const ProfileCurve& profile, double s_start, double L,
                             double s_mark, double s_stop, double t_window, double tol) {
    ConjugateScan res;
    const double dom_lo = profile.s_min(), dom_hi = profile.s_max();

    const std::function<void(double, const OdeState<8>&, OdeState<8>&)> rhs =
        [&](double, const OdeState<8>& y, OdeState<8>& dy) {
            const double sc = std::min(std::max(y[0], dom_lo), dom_hi);
            const ProfileSample p = profile.at(sc);
            dy[0] = y[1];
            dy[1] = L * L * p.dgamma / (p.gamma * p.gamma * p.gamma);
            dy[2] = L / (p.gamma * p.gamma);
            dy[3] = y[4];
            dy[4] = -p.K * y[3];
            dy[5] = y[6];
            dy[6] = -p.K * y[5];
            dy[7] = p.K;
        };

    OdeState<8> y{s_start, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0};

    const std::function<double(const DenseSegment<8>&)> on_step =
        [&](const DenseSegment<8>& seg) {
            const OdeState<8> y0 = seg.eval(seg.t0);
            const OdeState<8> y1 = seg.eval(seg.t1());
            double tc = std::numeric_limits<double>::quiet_NaN();

            if (res.t1 < 0.0 && y0[0] <= s_stop && y1[0] > s_stop) {
                tc = bisect_segment<8>(
                    seg, [&](const OdeState<8>& v) { return v[0] - s_stop; }, seg.t0, seg.t1());
                res.t1 = tc;
            }
            const double t_hi = std::isnan(tc) ? seg.t1() : tc;

            if (res.t2 < 0.0) {
                const double m0 = y0[0] - s_mark, m1 = seg.eval(t_hi)[0] - s_mark;
                if (m0 <= 0.0 && m1 > 0.0) {
                    const double tm = bisect_segment<8>(
                        seg, [&](const OdeState<8>& v) { return v[0] - s_mark; }, seg.t0, t_hi);
                    res.t2 = tm;
                    res.intK_at_t2 = seg.eval(tm)[7];
                }
            }
            if (!res.zero_field10) {
                const double a = y0[3], b = seg.eval(t_hi)[3];
                if ((a <= 0.0) != (b <= 0.0))
                    res.zero_field10 = bisect_segment<8>(
                        seg, [&](const OdeState<8>& v) { return v[3]; }, seg.t0, t_hi);
            }
            if (!res.zero_field01) {
                const double a = y0[5], b = seg.eval(t_hi)[5];
                if (seg.t0 > 1e-12 && (a <= 0.0) != (b <= 0.0))
                    res.zero_field01 = bisect_segment<8>(
                        seg, [&](const OdeState<8>& v) { return v[5]; }, seg.t0, t_hi);
            }
            return tc;
        };

    res.t_reached = integrate_ode<8>(rhs, y, 0.0, t_window, tol, on_step);
    res.y = y;
    return res;
}

}  // namespace

ConjugateReport euclidean_tube_bound(const SurfaceAssembly& euclidean_assembly, double delta2,
                                     double window_s, double tol) {
    if (euclidean_assembly.ambient != Ambient::euclidean)
        throw std::invalid_argument("euclidean_tube_bound wants a Euclidean-ambient assembly");
    const TubeRegion& tube = euclidean_assembly.tubes[0];
    const ProfileCurve& prof = tube.profile;
    if (window_s <= 0.0) window_s = prof.s_max();

    // delta3: the tangent turns horizontal (T_z = 0) inside (0, delta2).
    double delta3 = -1.0;
    {
        double prev = prof.at(1e-9).T_z;
        const int n = 4000;
        for (int i = 1; i <= n; ++i) {
            const double s = delta2 * i / n;
            const double cur = prof.at(s).T_z;
            if (prev > 0.0 && cur <= 0.0) {
                double lo = delta2 * (i - 1) / n, hi = s;
                for (int b = 0; b < 60; ++b) {
                    const double mid = 0.5 * (lo + hi);
                    (prof.at(mid).T_z > 0.0 ? lo : hi) = mid;
                }
                delta3 = 0.5 * (lo + hi);
                break;
            }
            prev = cur;
        }
    }
    if (delta3 <= 0.0) throw NoDelta3("profile tangent never turns horizontal inside delta2");

    const double g2 = prof.at(delta2).gamma;
    const double g3 = prof.at(delta3).gamma;
    ConjugateReport rep;
    rep.t2 = 0.0;

    const double denom2 = g2 * g2 - g3 * g3;
    if (denom2 < 1e-12) {
        rep.degenerate_window = true;
        rep.bound_value = std::numeric_limits<double>::infinity();
        return rep;
    }
    rep.bound_value =
        (1.0 - std::cos(tube.obstacle_radius / 2.0)) / std::sqrt(denom2);

    const ConjugateScan scan = conjugate_scan(prof, delta3, g3, delta2, window_s, 100.0, tol);
    rep.t2 = scan.t2;
    rep.t1 = scan.t1 > 0.0 ? scan.t1 : scan.t_reached;
    rep.integral_K = scan.intK_at_t2;
    rep.lemma_field_zero = scan.zero_field10;
    rep.first_blowup_time = scan.zero_field01;
    const bool found = (scan.zero_field10 && *scan.zero_field10 <= rep.t1) ||
                       (scan.zero_field01 && *scan.zero_field01 <= rep.t1);
    rep.verdict = found ? ConjugateReport::conjugate_points_found
                        : ConjugateReport::none_within_horizon;
    return rep;
}

ConjugateReport tube_conjugate_scan(const SurfaceAssembly& assembly, double s_turn,
                                    double t_window, double tol) {
    // Geodesic with turning point at arclength s_turn (tangent along the
    // revolution circles). Runs on the full assembly flow, so leaving the
    // tube continues over the sheets.
    const SurfaceState s0 = make_tube_state(assembly, 0, s_turn, 0.0, 1.5707963267948966);
    const JacobiPath f10 = jacobi_along(assembly, s0, t_window, {1.0, 0.0}, tol);
    const JacobiPath f01 = jacobi_along(assembly, s0, t_window, {0.0, 1.0}, tol);

    ConjugateReport rep;
    rep.t1 = t_window;
    if (!f10.conjugate_times.empty()) rep.lemma_field_zero = f10.conjugate_times.front();
    if (!f01.conjugate_times.empty()) rep.first_blowup_time = f01.conjugate_times.front();
    const bool found = rep.lemma_field_zero.has_value() || rep.first_blowup_time.has_value();
    rep.verdict = found ? ConjugateReport::conjugate_points_found
                        : ConjugateReport::none_within_horizon;
    return rep;
}

SurfaceState sample_surface_state(const SurfaceAssembly& assembly, Rng& rng) {
    // Region weights by surface area.
    double cap_solid = 0.0;
    for (const auto& tube : assembly.tubes)
        cap_solid += 2.0 * kPi * (1.0 - std::cos(tube.psi_junction));
    const double sheet_in_area =
        assembly.sheet_inner.metric_radius * assembly.sheet_inner.metric_radius *
        (4.0 * kPi - cap_solid);
    const double sheet_out_area =
        assembly.sheet_outer.metric_radius * assembly.sheet_outer.metric_radius *
        (4.0 * kPi - cap_solid);

    std::vector<double> tube_area(assembly.tubes.size(), 0.0);
    double total = sheet_in_area + sheet_out_area;
    for (std::size_t i = 0; i < assembly.tubes.size(); ++i) {
        const auto& prof = assembly.tubes[i].profile;
        const double lo = assembly.tubes[i].s_junction_minus;
        const double hi = assembly.tubes[i].s_junction_plus;
        double area = 0.0;
        const int n = 256;
        for (int k = 0; k < n; ++k) {
            const double s = lo + (hi - lo) * (k + 0.5) / n;
            area += prof.at(s).gamma;
        }
        tube_area[i] = 2.0 * kPi * area * (hi - lo) / n;
        total += tube_area[i];
    }

    double pick = rng.uniform(0.0, total);
    if (pick < sheet_in_area + sheet_out_area) {
        const bool outer = pick >= sheet_in_area;
        // Uniform point outside all junction caps.
        for (;;) {
            const UnitVec3 u = rng.unit_vector();
            bool clear = true;
            for (const auto& tube : assembly.tubes)
                if (spherical_distance(u, tube.axis) < tube.psi_junction) clear = false;
            if (!clear) continue;
            Vec3 b1, b2;
            orthonormal_basis(u.v, b1, b2);
            const double a = rng.uniform(0.0, 2.0 * kPi);
            return make_sheet_state(outer, u, b1 * std::cos(a) + b2 * std::sin(a));
        }
    }
    pick -= sheet_in_area + sheet_out_area;
    std::size_t ti = 0;
    while (ti + 1 < assembly.tubes.size() && pick > tube_area[ti]) pick -= tube_area[ti++];
    const auto& tube = assembly.tubes[ti];
    // s with density gamma(s) ds by rejection.
    const double lo = tube.s_junction_minus, hi = tube.s_junction_plus;
    double gmax = 0.0;
    for (int k = 0; k <= 32; ++k)
        gmax = std::max(gmax, tube.profile.at(lo + (hi - lo) * k / 32.0).gamma);
    double s;
    for (;;) {
        s = rng.uniform(lo, hi);
        if (rng.uniform(0.0, gmax) <= tube.profile.at(s).gamma) break;
    }
    return make_tube_state(assembly, static_cast<int>(ti), s, rng.uniform(0.0, 2.0 * kPi),
                           rng.uniform(0.0, 2.0 * kPi));
}

namespace {

struct SurfaceOrbitCheck {
    long long intervals{0};
    double worst_endpoint{std::numeric_limits<double>::infinity()};
    std::optional<IntervalViolation> violation;
};

SurfaceOrbitCheck check_surface_orbit(const SurfaceAssembly& A, const SurfaceState& s0,
                                      const SurfaceCertificateParams& p, double tol,
                                      std::size_t orbit_index) {
    SurfaceOrbitCheck res;
    const GeodesicPath path = [&] {
        AdvanceOutput out =
            advance_core(A, s0, p.window, tol, false, {1.0, 0.0}, nullptr, 0.0);
        return out.path;
    }();

    // Type-A candidate times: exits of tubes that are not almost avoided.
    std::vector<double> exits;
    for (const auto& seg : path.segments) {
        if (seg.region.on_sheet()) continue;
        if (seg.t1 >= p.window - 1e-12) continue;  // transit truncated by the window
        const bool almost_avoided =
            std::abs(seg.ps_entry) <= p.m && (seg.t1 - seg.t0) <= p.m;
        if (!almost_avoided) exits.push_back(seg.t1);
    }

    // Restart sequence anchored at the first type-A exit (the paper's
    // sequence is bi-infinite; a window-start anchor would create a
    // fractional first interval). Gaps are padded with type-B times at
    // spacing H + 2 nu; a type-B time within nu of the next exit is dropped
    // in favor of the exit.
    if (exits.empty()) return res;
    std::vector<double> tk{exits.front()};
    const double pad = p.horizon + 2.0 * p.nu;
    std::size_t ei = 1;
    for (;;) {
        const double next_exit =
            (ei < exits.size()) ? exits[ei] : std::numeric_limits<double>::infinity();
        const double tb = tk.back() + pad;
        if (next_exit <= tb + p.nu) {
            if (next_exit > p.window) break;
            tk.push_back(exits[ei++]);
        } else {
            if (tb > p.window) break;
            tk.push_back(tb);
        }
    }

    for (std::size_t k = 0; k + 1 < tk.size(); ++k) {
        const double dt = tk[k + 1] - tk[k];
        if (dt <= 1e-9) continue;
        ++res.intervals;
        const SurfaceState at_k = path_state_at(A, path, tk[k], tol);
        AdvanceOutput leg = advance_core(A, at_k, dt, tol, true, {1.0, 0.0}, nullptr, 0.0);
        auto violate = [&](IntervalViolation::Kind kind) {
            if (!res.violation)
                res.violation = IntervalViolation{orbit_index, tk[k], tk[k + 1], kind};
        };
        if (!leg.conj_times.empty()) {
            violate(IntervalViolation::Kind::blowup);
            continue;
        }
        const double u_end = leg.jac.dj / leg.jac.j;
        res.worst_endpoint = std::min(res.worst_endpoint, u_end);
        if (!(u_end > p.m)) violate(IntervalViolation::Kind::endpoint_leq_m);
    }
    return res;
}

}  // namespace

CertificateReport anosov_certificate(const SurfaceAssembly& assembly, int n_samples,
                                     const SurfaceCertificateParams& params, std::uint64_t seed,
                                     int workers, double tol) {
    if (!(params.m < params.nu))
        throw std::invalid_argument("certificate constants must satisfy m < nu");
    if (!(params.horizon > 0.0))
        throw std::invalid_argument("certificate needs the billiard horizon H > 0");

    CertificateReport report;
    report.params = {params.m, params.nu, params.horizon + 3.0 * params.nu, 0.0};
    report.samples_requested = n_samples;
    report.seed = seed;
    report.worst_endpoint_u = std::numeric_limits<double>::infinity();
    report.worst_lower_u = std::numeric_limits<double>::infinity();
    if (n_samples <= 0) {
        report.verdict = Verdict::inconclusive;
        return report;
    }

    auto results = parallel_map<SurfaceOrbitCheck>(
        static_cast<std::size_t>(n_samples),
        [&](std::size_t i) {
            Rng rng(seed, i);
            return check_surface_orbit(assembly, sample_surface_state(assembly, rng), params, tol,
                                       i);
        },
        workers);

    for (const auto& r : results) {
        ++report.samples_used;
        report.intervals_checked += r.intervals;
        report.worst_endpoint_u = std::min(report.worst_endpoint_u, r.worst_endpoint);
        if (r.violation && !report.first_violation) report.first_violation = r.violation;
    }
    if (report.first_violation)
        report.verdict = Verdict::counterexample;
    else if (report.intervals_checked == 0)
        report.verdict = Verdict::inconclusive;
    else
        report.verdict = Verdict::certified;
    return report;
}

void write_geodesic_csv(const SurfaceAssembly& assembly, const SurfaceState& s0, double t_end,
                        int samples, const std::string& path, double tol) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << std::setprecision(17);
    out << "t,s,theta,ps,ptheta,region,K,j,dj\n";

    const JacobiPath jp =
        jacobi_along(assembly, s0, t_end, {0.0, 1.0}, tol, t_end / samples);
    for (std::size_t i = 0; i < jp.samples.size(); ++i) {
        const double t = jp.samples[i].t;
        const SurfaceState st = path_state_at(assembly, jp.path, t, tol);
        double s, theta, ps, ptheta, K;
        const char* region;
        if (st.region.on_sheet()) {
            const SheetInfo info = sheet_info(assembly, st.region);
            const auto& ref = assembly.tubes[0];
            const double psi = spherical_distance(st.u, ref.axis);
            s = info.c * psi;
            Vec3 w = st.u.v - ref.axis.v * dot(st.u.v, ref.axis.v);
            theta = std::atan2(dot(w, ref.frame_b2), dot(w, ref.frame_b1));
            const Vec3 m = (w.norm() > 1e-12)
                               ? (w.normalized() * dot(st.u.v, ref.axis.v) -
                                  ref.axis.v * std::sin(psi))
                               : Vec3{0, 0, 0};
            ps = dot(st.v.v, m);
            ptheta = std::sqrt(std::max(0.0, 1.0 - ps * ps));
            K = info.K;
            region = st.region.kind == RegionTag::sheet_inner ? "sheet1" : "sheet2";
        } else {
            const auto& tube = assembly.tubes[st.region.tube_index];
            const ProfileSample p = tube.profile.at(st.s);
            s = st.s;
            theta = st.theta;
            ps = st.ps;
            ptheta = st.L / (p.xi * p.xi * p.r);
            K = p.K;
            region = "tube";
        }
        out << t << ',' << s << ',' << theta << ',' << ps << ',' << ptheta << ',' << region << ','
            << K << ',' << jp.samples[i].j << ',' << jp.samples[i].dj << '\n';
    }
}

}  // namespace anosov
