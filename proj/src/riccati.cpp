#include "anosov/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "anosov/ode.hpp"
#include "anosov/parallel.hpp"
#include "anosov/rng.hpp"

namespace anosov {

namespace {
constexpr double kPi = 3.141592653589793;
constexpr double kHalfPi = 1.5707963267948966;

JacobiPair pair_of(const RiccatiValue& u) {
    if (!u.finite) return {0.0, 1.0};
    // Normalized representative keeps the rotation well-conditioned.
    const double n = std::hypot(1.0, u.u);
    return {1.0 / n, u.u / n};
}
}  // namespace

JacobiPair free_flight_jacobi(const JacobiPair& p, double t) {
    const double c = std::cos(t), s = std::sin(t);
    return {p.j * c + p.dj * s, -p.j * s + p.dj * c};
}

RiccatiValue free_flight_riccati(const RiccatiValue& u0, double t) {
    return free_flight_jacobi(pair_of(u0), t).riccati();
}

RiccatiValue collision_jump(const RiccatiValue& u_minus, double kappa_mag, double sin_theta,
                            double grazing_tol) {
    if (sin_theta < grazing_tol) throw GrazingJump();
    if (!u_minus.finite) return u_minus;  // the finite jump is absorbed
    return RiccatiValue::of(u_minus.u + 2.0 * kappa_mag / sin_theta);
}

JacobiPair collision_jump_jacobi(const JacobiPair& p, double kappa_mag, double sin_theta,
                                 double grazing_tol) {
    if (sin_theta < grazing_tol) throw GrazingJump();
    return {p.j, p.dj + (2.0 * kappa_mag / sin_theta) * p.j};
}

BilliardRiccatiTrace::BilliardRiccatiTrace(const TrajectoryTrace& trace, const BilliardTable& table,
                                           double t0, RiccatiValue u0, double grazing_tol) {
    t0_ = t0;
    t_end_ = trace.total_time;

    seg_start_.push_back(t0);
    RiccatiValue u = u0;

    for (const auto& ev : trace.events) {
        if (ev.time < t0 - 1e-15) continue;
        if (ev.grazing) throw GrazingJump();
        const double kappa = obstacle_geodesic_curvature(table.obstacle(ev.obstacle_index));
        if (ev.time <= t0 + 1e-15) {
            // u0 is read as u(t0^-): the jump applies immediately.
            RiccatiEventLog log{ev.time, ev.obstacle_index, u, {}};
            u = collision_jump(u, kappa, ev.incidence_sin, grazing_tol);
            log.after = u;
            events_.push_back(log);
            continue;
        }
        const RiccatiValue before = free_flight_riccati(u, ev.time - seg_start_.back());
        seg_u_.push_back(u);
        RiccatiEventLog log{ev.time, ev.obstacle_index, before, {}};
        u = collision_jump(before, kappa, ev.incidence_sin, grazing_tol);
        log.after = u;
        events_.push_back(log);
        seg_start_.push_back(ev.time);
    }
    seg_u_.push_back(u);

    // Free-flight blow-ups: j(tau) = j cos(tau) + dj sin(tau) vanishes at
    // tau = atan2(-j, dj) mod pi within each segment.
    for (std::size_t k = 0; k < seg_u_.size(); ++k) {
        const double start = seg_start_[k];
        const double stop = (k + 1 < seg_start_.size()) ? seg_start_[k + 1] : t_end_;
        if (stop <= start) continue;
        const JacobiPair p = pair_of(seg_u_[k]);
        double tau = std::atan2(-p.j, p.dj);
        tau -= kPi * std::floor(tau / kPi);  // into [0, pi)
        if (tau < 1e-15) tau += kPi;
        for (double tb = start + tau; tb <= stop + 1e-15; tb += kPi) blowups_.push_back(tb);
    }
}

RiccatiValue BilliardRiccatiTrace::at(double t) const {
    std::size_t k = 0;
    while (k + 1 < seg_start_.size() && seg_start_[k + 1] <= t) ++k;
    return free_flight_riccati(seg_u_[k], t - seg_start_[k]);
}

void write_riccati_csv(const BilliardRiccatiTrace& trace, int samples, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << std::setprecision(17);
    out << "t,j,dj,u_finite,u\n";
    for (int i = 0; i <= samples; ++i) {
        const double t = trace.t0() + (trace.t_end() - trace.t0()) * i / samples;
        const RiccatiValue u = trace.at(t);
        const JacobiPair p = pair_of(u);
        out << t << ',' << p.j << ',' << p.dj << ',' << (u.finite ? 1 : 0) << ','
            << (u.finite ? u.u : 0.0) << '\n';
    }
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::certified: return "certified";
        case Verdict::counterexample: return "counterexample";
        default: return "inconclusive";
    }
}

AnalyticCertificate analytic_certificate(const BilliardTable& table, const HorizonResult& hor) {
    if (hor.unbounded) throw InfiniteHorizon();
    AnalyticCertificate cert;
    cert.A = table.max_radius();
    cert.H = hor.H;
    cert.lhs = 2.0 * std::tan(kHalfPi - cert.A);
    cert.rhs = std::tan(cert.H);
    cert.horizon_below_half_pi = cert.H < kHalfPi;
    cert.sum_condition = cert.A + cert.H < kHalfPi;
    cert.certified = cert.horizon_below_half_pi && cert.lhs > cert.rhs;
    cert.margin_m = cert.lhs - cert.rhs;
    return cert;
}

namespace {

struct OrbitCheck {
    bool grazing{false};
    long long intervals{0};
    double worst_endpoint{std::numeric_limits<double>::infinity()};
    double worst_lower{std::numeric_limits<double>::infinity()};
    std::optional<IntervalViolation> violation;
    std::optional<TrajectoryTrace> witness;
};

OrbitCheck check_orbit(const BilliardTable& table, const TangentStateS2& s0, double t_horizon,
                       const CertificateParams& p, double grazing_tol, std::size_t orbit_index) {
    OrbitCheck res;
    const TrajectoryTrace trace = simulate(table, s0, t_horizon, grazing_tol);
    if (trace.stopped_grazing) {
        res.grazing = true;
        return res;
    }

    auto violate = [&](double tk, double tk1, IntervalViolation::Kind kind) {
        if (!res.violation) {
            res.violation = IntervalViolation{orbit_index, tk, tk1, kind};
            res.witness = trace;
        }
    };

    for (std::size_t k = 0; k + 1 < trace.events.size(); ++k) {
        const auto& ev1 = trace.events[k + 1];
        const double tk = trace.events[k].time;
        const double tk1 = ev1.time;
        const double flight = tk1 - tk;
        ++res.intervals;

        if (flight < p.c - 1e-12) violate(tk, tk1, IntervalViolation::Kind::spacing_short);

        // Flights longer than C are split by restart times at spacing <= C;
        // only the final piece ends at a collision, so the earlier pieces can
        // never satisfy the endpoint condition.
        double last_leg = flight;
        if (flight > p.C + 1e-12) {
            violate(tk, tk1, IntervalViolation::Kind::spacing_long_unverifiable);
            const int n_sub = static_cast<int>(std::ceil(flight / p.C));
            last_leg = flight / n_sub;
        }

        // u(t_k^+) = 0, free flight under curvature one: u decreases
        // monotonically to u(t^-) = -tan(leg), blowing up at leg = pi/2.
        if (last_leg >= kHalfPi) {
            violate(tk, tk1, IntervalViolation::Kind::blowup);
            continue;
        }
        const double u_minus = -std::tan(last_leg);
        res.worst_lower = std::min(res.worst_lower, u_minus);
        if (u_minus < -p.A_bound) violate(tk, tk1, IntervalViolation::Kind::below_A);

        const double kappa = obstacle_geodesic_curvature(table.obstacle(ev1.obstacle_index));
        const double u_plus = u_minus + 2.0 * kappa / ev1.incidence_sin;
        res.worst_endpoint = std::min(res.worst_endpoint, u_plus);
        if (!(u_plus > p.m)) violate(tk, tk1, IntervalViolation::Kind::endpoint_leq_m);
    }
    return res;
}

}  // namespace

CertificateReport sampled_certificate(const BilliardTable& table, int n_samples, double t_horizon,
                                      const CertificateParams& params, std::uint64_t seed,
                                      int workers, double grazing_tol) {
    CertificateReport report;
    report.params = params;
    report.samples_requested = n_samples;
    report.seed = seed;
    report.worst_endpoint_u = std::numeric_limits<double>::infinity();
    report.worst_lower_u = std::numeric_limits<double>::infinity();

    if (n_samples <= 0) {
        report.verdict = Verdict::inconclusive;
        return report;
    }

    auto results = parallel_map<OrbitCheck>(
        static_cast<std::size_t>(n_samples),
        [&](std::size_t i) {
            Rng rng(seed, i);
            return check_orbit(table, rng.billiard_phase_point(table), t_horizon, params,
                               grazing_tol, i);
        },
        workers);

    for (const auto& r : results) {
        if (r.grazing) {
            ++report.grazing_discarded;
            continue;
        }
        ++report.samples_used;
        report.intervals_checked += r.intervals;
        report.worst_endpoint_u = std::min(report.worst_endpoint_u, r.worst_endpoint);
        report.worst_lower_u = std::min(report.worst_lower_u, r.worst_lower);
        if (r.violation && !report.first_violation) {
            report.first_violation = r.violation;
            report.witness = r.witness;
        }
    }

    if (report.first_violation)
        report.verdict = Verdict::counterexample;
    else if (report.samples_used == 0 || report.samples_used < n_samples / 2)
        report.verdict = Verdict::inconclusive;
    else
        report.verdict = Verdict::certified;
    return report;
}

JacobiPair surface_riccati_step(const JacobiPair& j0, const std::function<double(double)>& K_of_t,
                                double t0, double t1, double tol) {
    OdeState<2> y{j0.j, j0.dj};
    const std::function<void(double, const OdeState<2>&, OdeState<2>&)> f =
        [&K_of_t](double t, const OdeState<2>& s, OdeState<2>& dy) {
            dy[0] = s[1];
            dy[1] = -K_of_t(t) * s[0];
        };
    integrate_ode<2>(f, y, t0, t1, tol);
    return {y[0], y[1]};
}

double billiard_lyapunov_estimate(const BilliardTable& table, const TangentStateS2& s0,
                                  double t_end, double grazing_tol) {
    const TrajectoryTrace trace = simulate(table, s0, t_end, grazing_tol);
    JacobiPair p{1.0, 0.0};
    double log_scale = 0.0;
    double t = 0.0;
    for (const auto& ev : trace.events) {
        p = free_flight_jacobi(p, ev.time - t);
        t = ev.time;
        if (ev.grazing) break;  // trace stopped here
        p = collision_jump_jacobi(p, obstacle_geodesic_curvature(table.obstacle(ev.obstacle_index)),
                                  ev.incidence_sin, 0.0);
        const double mag = std::max(std::abs(p.j), std::abs(p.dj));
        if (mag > 1e100) {
            p.j /= mag;
            p.dj /= mag;
            log_scale += std::log(mag);
        }
    }
    p = free_flight_jacobi(p, trace.total_time - t);
    return (std::log(std::hypot(p.j, p.dj)) + log_scale) / trace.total_time;
}

}  // namespace anosov
