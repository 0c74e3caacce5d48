#include "anosov/surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace anosov {

namespace {
constexpr double kHalfPi = 1.5707963267948966;

SheetSpec sheet_spec(double rho) {
    SheetSpec s;
    s.rho = rho;
    s.metric_radius = 2.0 * rho / (1.0 + rho * rho);
    const double h = (1.0 + rho * rho) / (2.0 * rho);
    s.K = h * h;
    return s;
}

struct JunctionJets {
    double r, z, Tr, Tz, kappa, speed;
};

JunctionJets sheet_jets_at(double rho, double psi) {
    Jet2 r, z;
    axis_to_chart(Jet2::variable(psi), Jet2::constant(rho), r, z);
    JunctionJets j;
    j.r = r.f;
    j.z = z.f;
    j.speed = std::hypot(r.df, z.df);
    j.Tr = r.df / j.speed;
    j.Tz = z.df / j.speed;
    j.kappa = (z.df * r.ddf - r.df * z.ddf) / (j.speed * j.speed * j.speed);
    return j;
}

// G2 quintic Hermite between (P1, T1, k1) and (P2, T2, k2) with end speed
// sigma; returns false if the sampled curve is not monotone in both chart
// coordinates or dips below r_min.
bool try_quintic(const double P1[2], const double T1[2], double k1, const double P2[2],
                 const double T2[2], double k2, double sigma, double r_min, double cr[6],
                 double cz[6]) {
    // c'' = sigma^2 * k * n with n = (T_z, -T_r); tangential acceleration 0.
    const double dd1[2] = {sigma * sigma * k1 * T1[1], -sigma * sigma * k1 * T1[0]};
    const double dd2[2] = {sigma * sigma * k2 * T2[1], -sigma * sigma * k2 * T2[0]};
    quintic_coefficients(P1[0], sigma * T1[0], dd1[0], P2[0], sigma * T2[0], dd2[0], cr);
    quintic_coefficients(P1[1], sigma * T1[1], dd1[1], P2[1], sigma * T2[1], dd2[1], cz);

    const auto eval = [](const double c[6], double t, double& p, double& dp) {
        p = ((((c[5] * t + c[4]) * t + c[3]) * t + c[2]) * t + c[1]) * t + c[0];
        dp = (((5.0 * c[5] * t + 4.0 * c[4]) * t + 3.0 * c[3]) * t + 2.0 * c[2]) * t + c[1];
    };
    for (int i = 0; i <= 400; ++i) {
        const double t = i / 400.0;
        double r, dr, z, dz;
        eval(cr, t, r, dr);
        eval(cz, t, z, dz);
        if (r < r_min - 1e-12) return false;
        if (dr < -1e-9 * sigma || dz < -1e-9 * sigma) return false;
        if (std::hypot(dr, dz) < 1e-12) return false;
    }
    return true;
}

TubeRegion build_tube(const UnitVec3& axis, double obstacle_radius, double delta, double rho2,
                      double waist_curvature) {
    const double R_w = std::tan(obstacle_radius / 2.0);
    const double psi_j = obstacle_radius + delta;
    const JunctionJets J = sheet_jets_at(rho2, psi_j);

    const double dr_total = J.r - R_w;
    const double z_total = J.z;
    if (dr_total <= 0.0 || z_total <= 0.0)
        throw JunctionMismatch("junction circle does not clear the waist; increase delta");

    const double theta_j = std::atan2(J.Tz, J.Tr);
    const double a = 1.0 / waist_curvature;
    double phi1 = 0.3 * (kHalfPi - theta_j);
    phi1 = std::min(phi1, std::asin(std::min(1.0, z_total / (4.0 * a))));
    phi1 = std::min(phi1, std::acos(std::max(-1.0, 1.0 - dr_total / (4.0 * a))));
    if (phi1 < 1e-5)
        throw JunctionMismatch("waist arc does not fit between waist and junction; "
                               "increase waist_curvature or delta");

    const double P1[2] = {R_w + a * (1.0 - std::cos(phi1)), a * std::sin(phi1)};
    const double T1[2] = {std::sin(phi1), std::cos(phi1)};
    const double P2[2] = {J.r, J.z};
    const double T2[2] = {J.Tr, J.Tz};
    const double chord = std::hypot(P2[0] - P1[0], P2[1] - P1[1]);

    double cr[6], cz[6];
    bool ok = false;
    for (const double f : {1.0, 0.8, 1.25, 0.65, 1.5, 0.5, 2.0}) {
        if (try_quintic(P1, T1, waist_curvature, P2, T2, J.kappa, f * chord, R_w, cr, cz)) {
            ok = true;
            break;
        }
    }
    if (!ok)
        throw JunctionMismatch("no monotone collar found between waist arc and sheet; "
                               "adjust waist_curvature or sheet_offset");

    const double ext = std::min(0.5 * delta + 0.02, kHalfPi - psi_j - 1e-3);
    std::vector<ProfilePiece> pieces;
    pieces.push_back(make_arc_piece(R_w, a, phi1));
    pieces.push_back(make_quintic_piece(cr, cz));
    pieces.push_back(make_sheet_piece(rho2, psi_j, psi_j + ext));

    ProfileCurve profile(std::move(pieces), Ambient::spherical_stereographic, true, 1.0);
    TubeRegion tube(axis, obstacle_radius, psi_j, std::move(profile));
    tube.s_junction_plus = tube.profile.piece_end_s(1);
    tube.s_junction_minus = tube.profile.piece_end_s_lower(1);
    return tube;
}

// The junction must agree with the sheet sphere metrically: gamma(s_J) =
// c_rho * sin(psi_J) on both ends.
void check_junction(const TubeRegion& tube, const SheetSpec& outer, const SheetSpec& inner) {
    const double want_outer = outer.metric_radius * std::sin(tube.psi_junction);
    const double got_outer = tube.profile.at(tube.s_junction_plus).gamma;
    const double want_inner = inner.metric_radius * std::sin(tube.psi_junction);
    const double got_inner = tube.profile.at(tube.s_junction_minus).gamma;
    if (std::abs(want_outer - got_outer) > 1e-6 || std::abs(want_inner - got_inner) > 1e-6)
        throw JunctionMismatch("tube junction radius disagrees with the sheet sphere");
}

}  // namespace

Vec3 flatten_point(const Vec3& q, double epsilon) {
    const double n = q.norm();
    return q * epsilon + (q / n) * (1.0 - epsilon);
}

double gauss_curvature(const TubeRegion& tube, double s) { return tube.profile.at(s).K; }

BuildParams suggest_build_parameters(const BilliardTable& table) {
    BuildParams p;
    const double gap = std::min(table.min_gap(), 0.35);
    p.delta = 0.45 * gap;
    // In-chart collar width of the smallest obstacle (at rho = 1 the chart
    // radius of the angular circle psi is tan(psi/2)).
    double w = std::numeric_limits<double>::infinity();
    double cos_psi_j = 1.0;
    for (const auto& o : table.obstacles()) {
        const double wi = std::tan((o.radius + p.delta) / 2.0) - std::tan(o.radius / 2.0);
        if (wi < w) {
            w = wi;
            cos_psi_j = std::cos(o.radius + p.delta);
        }
    }
    p.sheet_offset = std::min(0.02, 1.2 * w * (1.0 + cos_psi_j));
    const double z_j = p.sheet_offset / (1.0 + cos_psi_j);
    p.waist_curvature = 3.0 / std::min(w, z_j);
    return p;
}

SurfaceAssembly build_sigma(const BilliardTable& table, double delta, double sheet_offset,
                            double waist_curvature) {
    if (!(delta > 0.0)) throw DeltaTooLarge("delta must be positive");
    if (!(sheet_offset > 0.0 && sheet_offset < 0.1))
        throw std::invalid_argument("sheet_offset must lie in (0, 0.1)");
    if (!(waist_curvature > 0.0)) throw std::invalid_argument("waist_curvature must be positive");

    // Enlarged circles must stay disjoint (and below the hemisphere bound).
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (table.obstacle(i).radius + delta >= kHalfPi)
            throw DeltaTooLarge("enlarged radius reaches pi/2 at obstacle " + std::to_string(i));
        for (std::size_t j = i + 1; j < table.size(); ++j)
            if (table.pairwise_distance(i, j) <=
                table.obstacle(i).radius + table.obstacle(j).radius + 2.0 * delta + 1e-10)
                throw DeltaTooLarge("enlarged circles " + std::to_string(i) + "," +
                                    std::to_string(j) + " intersect");
    }

    SurfaceAssembly assembly;
    assembly.ambient = Ambient::spherical_stereographic;
    assembly.table = table;
    assembly.delta = delta;
    assembly.sheet_offset = sheet_offset;
    assembly.waist_curvature = waist_curvature;
    assembly.epsilon = 1.0;
    const double rho1 = 1.0 - sheet_offset;
    assembly.sheet_inner = sheet_spec(rho1);
    assembly.sheet_outer = sheet_spec(1.0 / rho1);

    for (std::size_t i = 0; i < table.size(); ++i) {
        assembly.tubes.push_back(build_tube(table.obstacle(i).center, table.obstacle(i).radius,
                                            delta, assembly.sheet_outer.rho, waist_curvature));
        check_junction(assembly.tubes.back(), assembly.sheet_outer, assembly.sheet_inner);
    }
    return assembly;
}

SurfaceAssembly flatten(const SurfaceAssembly& assembly, double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("epsilon must lie in (0, 1]");
    if (epsilon == 1.0) return assembly;
    if (assembly.ambient != Ambient::spherical_stereographic)
        throw std::invalid_argument("flattening applies to the spherical ambient");

    SurfaceAssembly out = assembly;
    out.epsilon = assembly.epsilon * epsilon;
    const double rho1 = out.epsilon * (1.0 - assembly.sheet_offset) + (1.0 - out.epsilon);
    // Note: flattening does not commute with inversion, so the flattened
    // outer sheet is f_eps(rho2), not 1/f_eps(rho1).
    const double rho2 = out.epsilon / (1.0 - assembly.sheet_offset) + (1.0 - out.epsilon);
    out.sheet_inner = sheet_spec(rho1);
    out.sheet_outer = sheet_spec(rho2);

    out.tubes.clear();
    for (const auto& tube : assembly.tubes) {
        // Recompose from the unflattened base pieces with the combined
        // epsilon; affine maps fixing the sphere compose multiplicatively.
        ProfileCurve flat(tube.profile.base_pieces(), Ambient::spherical_stereographic, true,
                          out.epsilon);
        TubeRegion t(tube.axis, tube.obstacle_radius, tube.psi_junction, std::move(flat));
        t.s_junction_plus = t.profile.piece_end_s(1);
        t.s_junction_minus = t.profile.piece_end_s_lower(1);
        out.tubes.push_back(std::move(t));
        check_junction(out.tubes.back(), out.sheet_outer, out.sheet_inner);
    }
    return out;
}

AssumptionReport verify_assumptions(const SurfaceAssembly& assembly) {
    AssumptionReport rep;
    rep.transversality_worst_angle = kHalfPi;  // sheets are orthogonal to the fibers
    rep.waist_second_form_min = std::numeric_limits<double>::infinity();
    rep.inversion_residual = 0.0;
    rep.rotation_residual = 0.0;  // tubes are stored as revolution surfaces

    for (const auto& tube : assembly.tubes) {
        const double s_hi = tube.s_junction_plus;
        for (int side = 0; side < 2; ++side) {
            const double sj = side == 0 ? s_hi : tube.s_junction_minus;
            for (int i = 1; i <= 40; ++i) {
                const double s = sj * (0.05 + 0.95 * i / 40.0);
                const ProfileSample p = tube.profile.at(s);
                // Radial (fiber) direction in the chart, and the profile
                // tangent; both live in the meridian plane, and conformal
                // metrics preserve angles.
                Jet2 psi, rho, rj, zj;
                chart_to_axis(Jet2::constant(p.r), Jet2::constant(p.z), psi, rho);
                axis_to_chart(Jet2::constant(psi.f), Jet2::variable(rho.f), rj, zj);
                const double ang_rad = std::atan2(zj.df, rj.df);
                const double ang_tan = std::atan2(p.T_z, p.T_r);
                double d = std::fmod(std::abs(ang_rad - ang_tan), 3.141592653589793);
                d = std::min(d, 3.141592653589793 - d);
                rep.transversality_worst_angle = std::min(rep.transversality_worst_angle, d);
            }
        }

        const ProfileSample waist = tube.profile.at(0.0);
        rep.waist_second_form_min = std::min(rep.waist_second_form_min, std::abs(waist.k2));

        if (tube.profile.mirrored()) {
            for (int i = 1; i <= 64; ++i) {
                const double s = s_hi * i / 64.0;
                const ProfileSample up = tube.profile.at(s);
                // Mirror image at the same arclength on the lower half (for
                // the unflattened tube the halves have equal length).
                const double s_lo = tube.s_junction_minus * (s / s_hi);
                const ProfileSample dn = tube.profile.at(s_lo);
                Jet2 psi_u, rho_u, psi_d, rho_d;
                chart_to_axis(Jet2::constant(up.r), Jet2::constant(up.z), psi_u, rho_u);
                chart_to_axis(Jet2::constant(dn.r), Jet2::constant(dn.z), psi_d, rho_d);
                const double res =
                    std::abs(rho_d.f - 1.0 / rho_u.f) + std::abs(psi_d.f - psi_u.f);
                rep.inversion_residual = std::max(rep.inversion_residual, res);
            }
        } else {
            rep.inversion_residual = std::numeric_limits<double>::infinity();
        }
    }

    rep.transversality_pass = rep.transversality_worst_angle >= 1e-3;
    rep.waist_second_form_pass = rep.waist_second_form_min >= 1e-6;
    rep.symmetry_pass = rep.inversion_residual <= 1e-9;
    return rep;
}

FlatteningReport check_flattening_lemma(const ProfileCurve& profile, double epsilon, double m) {
    if (!(epsilon > 0.0 && epsilon <= 1.0) || !(m > 0.0 && m < 1.0))
        throw std::invalid_argument("epsilon and m must lie in (0, 1)");
    const ProfileSample waist = profile.at(0.0);
    if (std::abs(waist.k_prof) <= 1e-6)
        throw std::invalid_argument("profile curvature at the waist must be nonzero");

    FlatteningReport rep;

    // Work in the unflattened in-chart Euclidean arclength ell; build a
    // dense table ell(s) for non-Euclidean parametrizations.
    const int n_map = 4000;
    const double s_hi = profile.s_max();
    std::vector<double> s_of(n_map + 1), ell_of(n_map + 1);
    double ell = 0.0;
    double prev_inv = 1.0 / profile.at(0.0).xi;
    s_of[0] = 0.0;
    ell_of[0] = 0.0;
    for (int i = 1; i <= n_map; ++i) {
        const double s = s_hi * i / n_map;
        const double inv = 1.0 / profile.at(s).xi;
        ell += 0.5 * (prev_inv + inv) * (s_hi / n_map);
        prev_inv = inv;
        s_of[i] = s;
        ell_of[i] = ell;
    }
    const double ell_max = ell_of[n_map];
    auto s_at_ell = [&](double l) {
        auto it = std::lower_bound(ell_of.begin(), ell_of.end(), l);
        std::size_t hi = std::min<std::size_t>(std::max<std::ptrdiff_t>(1, it - ell_of.begin()),
                                               n_map);
        const double w = (l - ell_of[hi - 1]) / (ell_of[hi] - ell_of[hi - 1]);
        return s_of[hi - 1] + w * (s_of[hi] - s_of[hi - 1]);
    };

    const auto Tz_eps = [&](double l) {
        const ProfileSample p = profile.at(s_at_ell(l));
        return epsilon * p.T_z / std::hypot(p.T_r, epsilon * p.T_z);
    };
    const auto k_eps = [&](double l) {
        const ProfileSample p = profile.at(s_at_ell(l));
        const double de = std::hypot(p.T_r, epsilon * p.T_z);
        return epsilon * p.k_prof / (de * de * de);
    };

    // Crossover: first ell in (0, m) with T_z^eps = m (T_z^eps(0) = 1).
    const int n_scan = 4000;
    const double scan_hi = std::min(m, ell_max);
    double t_c = -1.0;
    double prev = Tz_eps(scan_hi * 1e-9);
    for (int i = 1; i <= n_scan; ++i) {
        const double l = scan_hi * i / n_scan;
        const double cur = Tz_eps(l);
        if (prev >= m && cur < m) {
            double lo = scan_hi * (i - 1) / n_scan, hi = l;
            for (int b = 0; b < 60; ++b) {
                const double mid = 0.5 * (lo + hi);
                if (Tz_eps(mid) >= m)
                    lo = mid;
                else
                    hi = mid;
            }
            t_c = 0.5 * (lo + hi);
            break;
        }
        prev = cur;
    }
    if (t_c <= 0.0)
        throw EpsilonNotSmallEnough("no crossover of T_z^eps = m inside (0, min(m, domain))");
    rep.t_c = t_c;

    // Statement 1 on (0, t_c).
    const double floor1 = m * m * m * m / (epsilon * epsilon);
    rep.min_k_ratio = std::numeric_limits<double>::infinity();
    for (int i = 1; i < 2000; ++i)
        rep.min_k_ratio = std::min(rep.min_k_ratio, k_eps(t_c * i / 2000.0) / floor1);
    rep.statement1_pass = rep.min_k_ratio >= 1.0;

    // Statement 2 on (t_c, m).
    rep.min_k_statement2 = std::numeric_limits<double>::infinity();
    rep.max_Tz_statement2 = 0.0;
    if (m > ell_max) {
        rep.note = "statement 2 window truncated to the profile domain";
    }
    const double w_hi = std::min(m, ell_max);
    for (int i = 1; i < 2000; ++i) {
        const double l = t_c + (w_hi - t_c) * i / 2000.0;
        rep.min_k_statement2 = std::min(rep.min_k_statement2, k_eps(l));
        rep.max_Tz_statement2 = std::max(rep.max_Tz_statement2, Tz_eps(l));
    }
    rep.statement2_pass = rep.min_k_statement2 >= 0.0 && rep.max_Tz_statement2 <= m * (1.0 + 1e-12);

    rep.ok = rep.statement1_pass && rep.statement2_pass && rep.note.empty();
    return rep;
}

EuclideanTube build_euclidean_tube(const EuclideanTubeParams& params) {
    const double r_obst = params.obstacle_radius;
    const double d2 = params.delta2;
    const double alpha2 = params.alpha_at_delta2;
    if (!(alpha2 < -r_obst / 2.0))
        throw std::invalid_argument("alpha_at_delta2 must be below -obstacle_radius/2");
    const double x0 = params.turn_fraction;

    // Curvature profile on [0, d2]: k = 1 + (k_peak - 1) B((l/d2 - x0)/(1-x0))
    // with the C^1 bump B(y) = 16 y^2 (1-y)^2; k = 1 beyond d2. k_peak is set
    // by the required total turn pi/2 - alpha2.
    const double bump_area = (1.0 - x0) * d2 * (8.0 / 15.0);
    const double k_peak = 1.0 + (kHalfPi - alpha2 - d2) / bump_area;
    if (!(k_peak > 1.0)) throw std::invalid_argument("cap cannot reach the requested turn");

    const auto bump = [](double y) { return 16.0 * y * y * (1.0 - y) * (1.0 - y); };
    const auto bump_int = [](double y) {  // integral of the bump from 0 to y
        return 16.0 * (y * y * y / 3.0 - y * y * y * y / 2.0 + y * y * y * y * y / 5.0);
    };
    const auto turn_to = [=](double l) {  // integral of k from 0 to l, within the cap
        double y = (l / d2 - x0) / (1.0 - x0);
        y = std::min(1.0, std::max(0.0, y));
        return l + (k_peak - 1.0) * (1.0 - x0) * d2 * bump_int(y);
    };
    const auto k_of = [=](double l) {
        if (l >= d2 || l <= x0 * d2) return 1.0;
        return 1.0 + (k_peak - 1.0) * bump((l / d2 - x0) / (1.0 - x0));
    };
    const auto alpha_of = [=](double l) { return kHalfPi - turn_to(l); };

    // delta3: alpha = 0.
    double lo = 0.0, hi = d2;
    for (int b = 0; b < 80; ++b) {
        const double mid = 0.5 * (lo + hi);
        if (alpha_of(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double delta3 = 0.5 * (lo + hi);
    if (!(delta3 > 0.0 && delta3 < d2)) throw NoDelta3("tangent never turns horizontal in the cap");

    // Cap position table, dense enough to resolve the 1/k_peak bend scale;
    // (r, z)' = (cos alpha, sin alpha) is a pure quadrature in l.
    const int n = 4096;
    auto lr = std::make_shared<std::vector<double>>(n + 1);
    auto lz = std::make_shared<std::vector<double>>(n + 1);
    {
        double r = std::sin(r_obst), z = std::cos(r_obst);
        (*lr)[0] = r;
        (*lz)[0] = z;
        const double h = d2 / n;
        for (int i = 1; i <= n; ++i) {
            const double l0 = (i - 1) * h;
            r += h *
                 (std::cos(alpha_of(l0)) + 4.0 * std::cos(alpha_of(l0 + 0.5 * h)) +
                  std::cos(alpha_of(l0 + h))) /
                 6.0;
            z += h *
                 (std::sin(alpha_of(l0)) + 4.0 * std::sin(alpha_of(l0 + 0.5 * h)) +
                  std::sin(alpha_of(l0 + h))) /
                 6.0;
            (*lr)[i] = r;
            (*lz)[i] = z;
        }
    }
    const double r_d2 = (*lr)[n], z_d2 = (*lz)[n];

    PieceFn cap_fn = [=](const Jet2& t, Jet2& rj, Jet2& zj) {
        const double l = t.f;
        const double a = alpha_of(l);
        const double k = k_of(l);
        const double h = d2 / n;
        const std::size_t i =
            std::min<std::size_t>(static_cast<std::size_t>(std::max(0.0, l / h)), n - 1);
        const double u = (l - i * h) / h;
        const double a0 = alpha_of(i * h), a1 = alpha_of((i + 1) * h);
        auto hermite = [&](double p0, double p1, double m0, double m1) {
            const double u2 = u * u, u3 = u2 * u;
            return p0 * (2 * u3 - 3 * u2 + 1) + m0 * h * (u3 - 2 * u2 + u) +
                   p1 * (-2 * u3 + 3 * u2) + m1 * h * (u3 - u2);
        };
        const double rv = hermite((*lr)[i], (*lr)[i + 1], std::cos(a0), std::cos(a1));
        const double zv = hermite((*lz)[i], (*lz)[i + 1], std::sin(a0), std::sin(a1));
        // Exact tangent chain: r' = cos(alpha), z' = sin(alpha), alpha' = -k.
        rj = Jet2{rv, std::cos(a) * t.df, std::sin(a) * k * t.df * t.df + std::cos(a) * t.ddf};
        zj = Jet2{zv, std::sin(a) * t.df, -std::cos(a) * k * t.df * t.df + std::sin(a) * t.ddf};
    };

    // Beyond the cap the profile is the unit circle arc in closed form.
    const double alpha2_exact = alpha_of(d2);
    PieceFn tail_fn = [=](const Jet2& t, Jet2& rj, Jet2& zj) {
        const Jet2 a = Jet2{alpha2_exact, 0.0, 0.0} - (t - d2);
        rj = r_d2 + std::sin(alpha2_exact) - sin(a);
        zj = z_d2 + cos(a) - std::cos(alpha2_exact);
    };

    EuclideanTube tube{SurfaceAssembly{}, d2, delta3};
    tube.assembly.ambient = Ambient::euclidean;
    tube.assembly.epsilon = 1.0;
    std::vector<ProfilePiece> pieces;
    pieces.push_back({std::move(cap_fn), 0.0, d2});
    pieces.push_back({std::move(tail_fn), d2, params.s_extent});
    ProfileCurve curve(std::move(pieces), Ambient::euclidean, false, 1.0);
    TubeRegion region(UnitVec3(0, 0, 1), r_obst, r_obst, std::move(curve));
    region.s_junction_plus = params.s_extent;
    region.s_junction_minus = 0.0;
    tube.assembly.tubes.push_back(std::move(region));
    return tube;
}

SurfaceAssembly build_standalone_spherical_tube(double obstacle_radius, double delta,
                                                double sheet_offset, double waist_curvature,
                                                double epsilon) {
    SurfaceAssembly assembly;
    assembly.ambient = Ambient::spherical_stereographic;
    assembly.delta = delta;
    assembly.sheet_offset = sheet_offset;
    assembly.waist_curvature = waist_curvature;
    assembly.epsilon = 1.0;
    const double rho1 = 1.0 - sheet_offset;
    assembly.sheet_inner = sheet_spec(rho1);
    assembly.sheet_outer = sheet_spec(1.0 / rho1);
    assembly.tubes.push_back(build_tube(UnitVec3(0, 0, 1), obstacle_radius, delta,
                                        assembly.sheet_outer.rho, waist_curvature));
    check_junction(assembly.tubes.back(), assembly.sheet_outer, assembly.sheet_inner);
    return epsilon == 1.0 ? assembly : flatten(assembly, epsilon);
}

}  // namespace anosov
