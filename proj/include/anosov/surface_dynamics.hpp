#pragma once
// Geodesic flow, Jacobi fields, Clairaut records, conjugate-point detection
// and the cone-condition certifier on surface assemblies. Each rotationally
// symmetric region is integrated in its own chart: sheets flow in closed form
// on their coordinate sphere, tubes integrate the reduced metric
// ds^2 + G(s) dtheta^2; junction handoffs re-seed the state through the
// shared embedding.

#include <cstdint>

#include "anosov/riccati.hpp"
#include "anosov/rng.hpp"
#include "anosov/surface.hpp"

namespace anosov {

struct LeftDomain : std::runtime_error {
    explicit LeftDomain(const std::string& msg) : std::runtime_error(msg) {}
};

struct RegionTag {
    enum Kind { sheet_inner, sheet_outer, tube } kind{sheet_outer};
    int tube_index{-1};

    bool on_sheet() const { return kind != tube; }
    bool operator==(const RegionTag& o) const {
        return kind == o.kind && tube_index == o.tube_index;
    }
};

// Surface phase point. Sheets carry the coordinate great-circle state
// (u, v) on the unit sphere; tubes carry (s, theta, ps) plus the region
// Clairaut constant L = G theta'.
struct SurfaceState {
    RegionTag region;
    UnitVec3 u, v;  // sheet chart
    double s{0.0}, theta{0.0}, ps{0.0}, L{0.0};  // tube chart
};

SurfaceState make_sheet_state(bool outer, const UnitVec3& u, const Vec3& v);
SurfaceState make_tube_state(const SurfaceAssembly& assembly, int tube, double s, double theta,
                             double direction_angle);  // ps = cos, v_theta = sin

// Global-chart embedding of a state (position only).
Vec3 state_position(const SurfaceAssembly& assembly, const SurfaceState& state);

// Clairaut data of one rotationally symmetric segment.
struct ClairautRecord {
    double L{0.0};
    double drift{0.0};  // max |L(t) - L(t0)| over the segment, L recomputed from the state
};

struct PathSegment {
    RegionTag region;
    double t0{0.0}, t1{0.0};
    SurfaceState entry;  // state at t0
    ClairautRecord clairaut;
    double ps_entry{0.0};  // tube segments: meridional speed at entry
};

struct GeodesicPath {
    std::vector<PathSegment> segments;
    SurfaceState final_state;
    double t_end{0.0};
    double total_clairaut_drift{0.0};   // sum over segments of drift
    double worst_unit_speed_error{0.0};
};

GeodesicPath integrate_geodesic(const SurfaceAssembly& assembly, const SurfaceState& s0,
                                double t_end, double tol = 1e-10);

// State on a recorded path at an arbitrary time (sheet segments in closed
// form, tube segments re-integrated from their entry).
SurfaceState path_state_at(const SurfaceAssembly& assembly, const GeodesicPath& path, double t,
                           double tol = 1e-10);

struct JacobiSample {
    double t{0.0};
    double j{0.0};
    double dj{0.0};
};

struct JacobiPath {
    GeodesicPath path;
    JacobiPair final;     // scaled by exp(log_scale)
    double log_scale{0.0};
    std::vector<double> conjugate_times;  // zeros of j in (0, t_end]
    std::vector<JacobiSample> samples;
};

JacobiPath jacobi_along(const SurfaceAssembly& assembly, const SurfaceState& s0, double t_end,
                        const JacobiPair& j0, double tol = 1e-10, double sample_dt = 0.0);

// log |j(t_end)| / t_end for j0 = (1, 0).
double surface_lyapunov_estimate(const SurfaceAssembly& assembly, const SurfaceState& s0,
                                 double t_end, double tol = 1e-9);

struct ConjugateReport {
    int geodesic_id{0};
    std::optional<double> first_blowup_time;  // first zero of the (0,1) Jacobi field
    std::optional<double> lemma_field_zero;   // first zero of the (1,0) field (u(0) = 0)
    double bound_value{0.0};                  // closed-form curvature-integral lower bound
    double integral_K{0.0};                   // numerically accumulated int_0^{t2} K dt
    double t2{0.0};                           // time of reaching arclength delta2
    double t1{0.0};                           // time of reaching the tube window end
    bool degenerate_window{false};
    enum Verdict { conjugate_points_found, none_within_horizon } verdict{none_within_horizon};
};

// The Euclidean obstruction analysis: selects the geodesic with Clairaut
// constant gamma_r(delta3) (turning point at the horizontal-tangent
// arclength), verifies the curvature-integral lower bound up to the time of
// reaching delta2, and detects the Riccati blow-up / Jacobi zero before the
// tube window ends at window_s (defaults to the profile end).
ConjugateReport euclidean_tube_bound(const SurfaceAssembly& euclidean_assembly, double delta2,
                                     double window_s, double tol = 1e-10);

// Runs the same window on an arbitrary tube assembly with the turning point
// at arclength s_turn; used for the spherical-ambient contrast twin.
ConjugateReport tube_conjugate_scan(const SurfaceAssembly& assembly, double s_turn,
                                    double t_window, double tol = 1e-10);

struct SurfaceCertificateParams {
    double m{0.01};
    double nu{0.05};
    double window{40.0};
    double horizon{0.0};  // billiard horizon H of the underlying table
};

// Cone-condition certifier on a flattened assembly: samples unit tangent
// vectors by area, integrates each geodesic over the window, selects restart
// times t_k at exits of tubes that are not almost avoided (|ps_in| <= m and
// transit <= m), pads gaps with type-B times at spacing H + 2 nu, and checks
// that the Riccati solution from u(t_k) = 0 stays finite with
// u(t_{k+1}) > m.
CertificateReport anosov_certificate(const SurfaceAssembly& assembly, int n_samples,
                                     const SurfaceCertificateParams& params,
                                     std::uint64_t seed = 1, int workers = 0, double tol = 1e-9);

// Deterministic area-weighted random state.
SurfaceState sample_surface_state(const SurfaceAssembly& assembly, Rng& rng);

// CSV export (t, s, theta, ps, ptheta, region, K, j, dj) on a uniform grid;
// sheet rows are reported in the frame of the axis of the next tube entered
// (or tube 0).
void write_geodesic_csv(const SurfaceAssembly& assembly, const SurfaceState& s0, double t_end,
                        int samples, const std::string& path, double tol = 1e-10);

}  // namespace anosov
