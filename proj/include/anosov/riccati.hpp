#pragma once
// Riccati/Jacobi evolution along billiard trajectories, the reflection jump
// rule, blow-up handling, and the two hyperbolicity certifiers (analytic and
// sampled).

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "anosov/billiard.hpp"
#include "anosov/horizon.hpp"

namespace anosov {

struct GrazingJump : std::runtime_error {
    GrazingJump() : std::runtime_error("Riccati jump at sin(theta) below grazing tolerance") {}
};

struct InfiniteHorizon : std::runtime_error {
    InfiniteHorizon() : std::runtime_error("horizon unbounded: analytic certificate undefined") {}
};

// Projective Riccati value u = dj/j; finite = false encodes u at infinity
// (j = 0, a blow-up / conjugate point).
struct RiccatiValue {
    bool finite{true};
    double u{0.0};

    static RiccatiValue infinite() { return {false, 0.0}; }
    static RiccatiValue of(double u) { return {true, u}; }
};

// Nontrivial solution (j, j') of the linear Jacobi equation j'' = -K j.
struct JacobiPair {
    double j{1.0};
    double dj{0.0};

    RiccatiValue riccati() const {
        // Representable threshold: |u| beyond 1e15 is indistinguishable from
        // a blow-up at double precision.
        if (std::abs(dj) >= 1e15 * std::abs(j)) return RiccatiValue::infinite();
        return RiccatiValue::of(dj / j);
    }
};

// Closed-form free flight under curvature 1 (u' = -1 - u^2), computed
// projectively as a rotation of (j, dj): total in t, blow-ups included.
RiccatiValue free_flight_riccati(const RiccatiValue& u0, double t);

// (j, dj) after free flight of duration t under K = 1: rotation by angle t.
JacobiPair free_flight_jacobi(const JacobiPair& p, double t);

// Dispersing collision jump u+ = u- + 2 kappa_mag / sin_theta. kappa_mag is
// the positive curvature magnitude cot(obstacle radius); the paper's signed
// boundary curvature is negative for these obstacles, which makes the jump
// additive. Throws GrazingJump below the tolerance.
RiccatiValue collision_jump(const RiccatiValue& u_minus, double kappa_mag, double sin_theta,
                            double grazing_tol = 1e-4);

// Same jump applied to a Jacobi pair: j continuous, dj += jump * j.
JacobiPair collision_jump_jacobi(const JacobiPair& p, double kappa_mag, double sin_theta,
                                 double grazing_tol = 1e-4);

struct RiccatiEventLog {
    double time{0.0};
    int obstacle{-1};
    RiccatiValue before;  // u(t_k^-)
    RiccatiValue after;   // u(t_k^+)
};

// Piecewise Riccati solution along a billiard trace from (t0, u0). If t0
// coincides with an event time, the jump applies immediately (u0 is read as
// u(t0^-)).
class BilliardRiccatiTrace {
  public:
    BilliardRiccatiTrace(const TrajectoryTrace& trace, const BilliardTable& table, double t0,
                         RiccatiValue u0, double grazing_tol = 1e-4);

    // u(t) with the post-jump convention at event times.
    RiccatiValue at(double t) const;
    const std::vector<RiccatiEventLog>& events() const { return events_; }
    const std::vector<double>& blowup_times() const { return blowups_; }
    double t0() const { return t0_; }
    double t_end() const { return t_end_; }

  private:
    double t0_, t_end_;
    // Segment k starts at seg_start_[k] with value seg_u_[k] (post-jump).
    std::vector<double> seg_start_;
    std::vector<RiccatiValue> seg_u_;
    std::vector<RiccatiEventLog> events_;
    std::vector<double> blowups_;
};

// CSV export (t, j, dj, u_finite, u) on a uniform time grid.
void write_riccati_csv(const BilliardRiccatiTrace& trace, int samples, const std::string& path);

enum class Verdict { certified, counterexample, inconclusive };

const char* verdict_name(Verdict v);

struct AnalyticCertificate {
    bool certified{false};
    double A{0.0};
    double H{0.0};
    double lhs{0.0};  // 2 tan(pi/2 - A)
    double rhs{0.0};  // tan(H)
    bool horizon_below_half_pi{false};
    bool sum_condition{false};  // the weaker sufficient check A + H < pi/2
    double margin_m{0.0};       // 2 tan(pi/2 - A) - tan(H) when certified
};

// Certified iff H < pi/2 and 2 tan(pi/2 - A) > tan(H). Throws
// InfiniteHorizon when the horizon result is unbounded.
AnalyticCertificate analytic_certificate(const BilliardTable& table, const HorizonResult& hor);

struct CertificateParams {
    double m{0.0};
    double c{0.0};
    double C{0.0};
    double A_bound{0.0};
};

struct IntervalViolation {
    std::size_t orbit{0};
    double t_k{0.0};
    double t_k1{0.0};
    enum class Kind { spacing_short, spacing_long_unverifiable, blowup, below_A, endpoint_leq_m } kind;
};

struct CertificateReport {
    Verdict verdict{Verdict::inconclusive};
    CertificateParams params;
    int samples_requested{0};
    int samples_used{0};       // non-grazing orbits actually checked
    int grazing_discarded{0};
    long long intervals_checked{0};
    double worst_endpoint_u{0.0};  // min over intervals of u(t_{k+1}^+)
    double worst_lower_u{0.0};     // min over intervals of inf u(t^+)
    std::optional<IntervalViolation> first_violation;
    std::optional<TrajectoryTrace> witness;
    std::uint64_t seed{0};
};

// Samples phase points uniformly (area x angle), discards grazing orbits,
// takes t_k = collision times, restarts u(t_k^+) = 0 on each interval and
// checks the sampled hyperbolicity conditions with the supplied constants.
// Flights longer than C are split by intermediate restart times; such
// sub-intervals cannot satisfy the endpoint condition and are reported as
// violations, never silently passed.
CertificateReport sampled_certificate(const BilliardTable& table, int n_samples, double t_horizon,
                                      const CertificateParams& params, std::uint64_t seed = 1,
                                      int workers = 0, double grazing_tol = 1e-4);

// Adaptive Jacobi integration of j'' = -K(t) j over [t0, t1] with local
// tolerance tol. K is an arbitrary curvature function of time.
JacobiPair surface_riccati_step(const JacobiPair& j0, const std::function<double(double)>& K_of_t,
                                double t0, double t1, double tol = 1e-10);

// Billiard Lyapunov-exponent estimate log|j(t_end)| / t_end for j0 = (1, 0),
// with periodic renormalization. Grazing-terminated traces return the
// estimate over the time actually covered.
double billiard_lyapunov_estimate(const BilliardTable& table, const TangentStateS2& s0,
                                  double t_end, double grazing_tol = 1e-4);

}  // namespace anosov
