#include "anosov/profile.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace anosov {

void chart_to_axis(const Jet2& r, const Jet2& z, Jet2& psi, Jet2& rho) {
    const Jet2 D = 1.0 + r * r + z * z;
    const Jet2 w = 2.0 * z / D;          // old 4th coordinate
    const Jet2 alpha = (1.0 - r * r - z * z) / D;
    const Jet2 beta = 2.0 * r / D;
    rho = sqrt((1.0 + w) / (1.0 - w));
    psi = atan2(beta, alpha);
}

void axis_to_chart(const Jet2& psi, const Jet2& rho, Jet2& r, Jet2& z) {
    const Jet2 D = 1.0 + rho * rho + 2.0 * rho * cos(psi);
    r = 2.0 * rho * sin(psi) / D;
    z = (rho * rho - 1.0) / D;
}

ProfilePiece make_arc_piece(double r0, double radius, double phi1) {
    PieceFn fn = [r0, radius](const Jet2& t, Jet2& r, Jet2& z) {
        r = r0 + radius * (1.0 - cos(t));
        z = radius * sin(t);
    };
    return {std::move(fn), 0.0, phi1};
}

ProfilePiece make_quintic_piece(const double cr[6], const double cz[6]) {
    std::array<double, 6> ar, az;
    std::copy(cr, cr + 6, ar.begin());
    std::copy(cz, cz + 6, az.begin());
    PieceFn fn = [ar, az](const Jet2& t, Jet2& r, Jet2& z) {
        Jet2 pr = Jet2::constant(ar[5]);
        Jet2 pz = Jet2::constant(az[5]);
        for (int k = 4; k >= 0; --k) {
            pr = pr * t + ar[k];
            pz = pz * t + az[k];
        }
        r = pr;
        z = pz;
    };
    return {std::move(fn), 0.0, 1.0};
}

ProfilePiece make_sheet_piece(double rho, double psi_from, double psi_to) {
    PieceFn fn = [rho](const Jet2& t, Jet2& r, Jet2& z) {
        axis_to_chart(t, Jet2::constant(rho), r, z);
    };
    return {std::move(fn), psi_from, psi_to};
}

void quintic_coefficients(double p0, double d0, double dd0, double p1, double d1, double dd1,
                          double out[6]) {
    // p(t) = c0 + c1 t + ... + c5 t^5 on [0, 1] matching value, first and
    // second derivative at both ends.
    out[0] = p0;
    out[1] = d0;
    out[2] = 0.5 * dd0;
    const double a = p1 - p0 - d0 - 0.5 * dd0;
    const double b = d1 - d0 - dd0;
    const double c = dd1 - dd0;
    out[3] = 10.0 * a - 4.0 * b + 0.5 * c;
    out[4] = -15.0 * a + 7.0 * b - c;
    out[5] = 6.0 * a - 3.0 * b + 0.5 * c;
}

ProfileCurve::ProfileCurve(std::vector<ProfilePiece> pieces, Ambient ambient, bool mirrored,
                           double epsilon)
    : base_(std::move(pieces)), ambient_(ambient), mirrored_(mirrored), epsilon_(epsilon) {
    build_half(upper_, false);
    s_max_ = upper_.length;
    if (mirrored_) {
        build_half(lower_, true);
        s_min_ = -lower_.length;
    } else {
        s_min_ = 0.0;
    }
}

namespace {

// Composes one base piece with optional mirror (z -> -z) and the exact
// flattening map in axis coordinates.
PieceFn compose_piece(const PieceFn& base, bool mirror, double epsilon) {
    if (!mirror && epsilon == 1.0) return base;
    return [base, mirror, epsilon](const Jet2& t, Jet2& r, Jet2& z) {
        base(t, r, z);
        if (mirror) z = -z;
        if (epsilon != 1.0) {
            Jet2 psi, rho;
            chart_to_axis(r, z, psi, rho);
            rho = rho * epsilon + (1.0 - epsilon);
            axis_to_chart(psi, rho, r, z);
        }
    };
}

}  // namespace

double ProfileCurve::speed(const Half& half, std::size_t piece, double t) const {
    Jet2 r, z;
    half.pieces[piece].fn(Jet2::variable(t), r, z);
    const double se = std::hypot(r.df, z.df);
    if (ambient_ == Ambient::euclidean) return se;
    const double xi = 2.0 / (1.0 + r.f * r.f + z.f * z.f);
    return xi * se;
}

void ProfileCurve::speed_and_deriv(const Half& half, std::size_t piece, double t, double& sp,
                                   double& dsp) const {
    Jet2 r, z;
    half.pieces[piece].fn(Jet2::variable(t), r, z);
    const double se = std::hypot(r.df, z.df);
    const double dse = (r.df * r.ddf + z.df * z.ddf) / se;
    if (ambient_ == Ambient::euclidean) {
        sp = se;
        dsp = dse;
        return;
    }
    const double xi = 2.0 / (1.0 + r.f * r.f + z.f * z.f);
    const double dxi = -xi * xi * (r.f * r.df + z.f * z.df);
    sp = xi * se;
    dsp = dxi * se + xi * dse;
}

void ProfileCurve::build_half(Half& half, bool mirror) const {
    half.pieces.clear();
    half.tables.clear();
    half.piece_end_s.clear();
    double s_acc = 0.0;

    for (const auto& bp : base_) {
        ProfilePiece cp{compose_piece(bp.fn, mirror, epsilon_), bp.t0, bp.t1};
        half.pieces.push_back(cp);
        const std::size_t pi = half.pieces.size() - 1;

        // Adaptive arclength quadrature: recursive bisection with 5-point
        // Gauss-Legendre until each interval self-validates.
        static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                     0.5384693101056831, 0.9061798459386640};
        static const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                     0.4786286704993665, 0.2369268850561891};
        auto gauss = [&](double a, double b) {
            const double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
            double acc = 0.0;
            for (int i = 0; i < 5; ++i) acc += gw[i] * speed(half, pi, mid + hw * gx[i]);
            return acc * hw;
        };
        struct Seg {
            double a, b, len;
        };
        std::vector<Seg> done;
        // Subdivide until the Gauss estimate self-validates and a minimum
        // resolution is reached (the inverse interpolation needs it).
        std::function<void(double, double, double, int)> refine = [&](double a, double b,
                                                                      double len, int depth) {
            const double m = 0.5 * (a + b);
            const double l1 = gauss(a, m), l2 = gauss(m, b);
            const bool converged = std::abs(l1 + l2 - len) < 1e-14 * (1.0 + std::abs(l1 + l2));
            const bool coarse = (b - a) > (cp.t1 - cp.t0) / 64.0;
            if (depth < 24 && (!converged || coarse)) {
                refine(a, m, l1, depth + 1);
                refine(m, b, l2, depth + 1);
            } else {
                done.push_back({a, m, l1});
                done.push_back({m, b, l2});
            }
        };
        refine(cp.t0, cp.t1, gauss(cp.t0, cp.t1), 0);
        std::sort(done.begin(), done.end(), [](const Seg& x, const Seg& y) { return x.a < y.a; });

        std::vector<Half::Node> table;
        table.reserve(done.size() + 1);
        auto node_at = [&](double t, double s) {
            // dt/ds = 1/speed, d2t/ds2 = -speed'(t) / speed^3, both exact
            // from the jets.
            double sp, dsp;
            speed_and_deriv(half, pi, t, sp, dsp);
            return Half::Node{s, t, 1.0 / sp, -dsp / (sp * sp * sp)};
        };
        double s_local = 0.0;
        table.push_back(node_at(cp.t0, 0.0));
        for (const auto& seg : done) {
            s_local += seg.len;
            table.push_back(node_at(seg.b, s_local));
        }
        half.tables.push_back(std::move(table));
        s_acc += s_local;
        half.piece_end_s.push_back(s_acc);
    }
    half.length = s_acc;
}

ProfileSample ProfileCurve::eval_half(const Half& half, double s_abs, bool negate_z) const {
    // Locate the piece.
    std::size_t pi = 0;
    double s_piece_start = 0.0;
    while (pi + 1 < half.pieces.size() && s_abs > half.piece_end_s[pi]) {
        s_piece_start = half.piece_end_s[pi];
        ++pi;
    }
    const auto& table = half.tables[pi];
    const double s_local = std::min(std::max(s_abs - s_piece_start, 0.0), table.back().s);

    // Quintic Hermite inverse interpolation of t(s) on the bracketing node
    // interval.
    auto it = std::upper_bound(table.begin(), table.end(), s_local,
                               [](double v, const Half::Node& n) { return v < n.s; });
    const std::size_t hi = std::min<std::size_t>(
        std::max<std::size_t>(1, static_cast<std::size_t>(it - table.begin())), table.size() - 1);
    const auto& n0 = table[hi - 1];
    const auto& n1 = table[hi];
    const double hs = n1.s - n0.s;
    const double x = hs > 0.0 ? (s_local - n0.s) / hs : 0.0;
    double t;
    {
        const double p0 = n0.t, p1 = n1.t;
        const double d0 = n0.dt * hs, d1 = n1.dt * hs;
        const double dd0 = n0.ddt * hs * hs, dd1 = n1.ddt * hs * hs;
        double c[6];
        quintic_coefficients(p0, d0, dd0, p1, d1, dd1, c);
        t = ((((c[5] * x + c[4]) * x + c[3]) * x + c[2]) * x + c[1]) * x + c[0];
        t = std::min(std::max(t, half.pieces[pi].t0), half.pieces[pi].t1);
    }

    // Lower-half pieces are already mirrored (z -> -z composed before the
    // flattening); the piece parameter runs away from the waist, i.e. against
    // increasing arclength, so orientation-sensitive quantities get a sign
    // flip below.
    Jet2 r, z;
    half.pieces[pi].fn(Jet2::variable(t), r, z);
    const double orient = negate_z ? -1.0 : 1.0;

    ProfileSample out;
    out.s = negate_z ? -s_abs : s_abs;
    out.r = r.f;
    out.z = z.f;

    const double se = std::hypot(r.df, z.df);  // in-chart Euclidean speed in t
    out.T_r = orient * r.df / se;
    out.T_z = orient * z.df / se;
    out.k_prof = orient * (z.df * r.ddf - r.df * z.ddf) / (se * se * se);

    const double dspeed_e = (r.df * r.ddf + z.df * z.ddf) / se;

    if (ambient_ == Ambient::euclidean) {
        out.xi = 1.0;
        out.gamma = r.f;
        out.dgamma = orient * r.df / se;  // d r / d s, s Euclidean arclength
        // K = -(d cos(alpha)/ds)/gamma with cos(alpha) = T_r.
        const double dTr_dt = (r.ddf * se - r.df * dspeed_e) / (se * se);
        out.K = -(dTr_dt / se) / r.f;
        out.k1 = -out.T_z / r.f;
        out.k2 = out.k_prof;
        return out;
    }

    const double xi = 2.0 / (1.0 + r.f * r.f + z.f * z.f);
    out.xi = xi;
    out.gamma = xi * r.f;
    // d(xi r)/dt, then divide by ds/dt = xi * se.
    const double dxi_dt = -xi * xi * (r.f * r.df + z.f * z.df);
    out.dgamma = orient * (dxi_dt * r.f + xi * r.df) / (xi * se);

    // Principal curvatures of the revolution surface for g_stereo, from the
    // conformal-change rule k_stereo = (k_eucl - dn(log xi)) / xi with the
    // outward normal n = (T_z, -T_r).
    const double n_r = out.T_z, n_z = -out.T_r;
    const double dn_logxi = -xi * (r.f * n_r + z.f * n_z);
    out.k2 = (out.k_prof - dn_logxi) / xi;
    out.k1 = (-n_r / r.f - dn_logxi) / xi;
    out.K = out.k1 * out.k2 + 1.0;
    return out;
}

ProfileSample ProfileCurve::at(double s) const {
    if (s < s_min_ - 1e-9 || s > s_max_ + 1e-9) throw DomainError(s);
    if (s >= 0.0 || !mirrored_) return eval_half(upper_, std::min(std::abs(s), s_max_), false);
    return eval_half(lower_, std::min(-s, -s_min_), true);
}

}  // namespace anosov
