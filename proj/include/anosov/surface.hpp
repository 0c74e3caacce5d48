#pragma once
// Construction of the closed surface approximating a spherical billiard: two
// near-spherical sheets joined by inversion-symmetric tubes of revolution
// around each obstacle axis, the exact flattening map, curvature evaluation
// in both ambients, assumption verification, and the flattening lemma check.

#include <optional>
#include <string>

#include "anosov/profile.hpp"
#include "anosov/sphere.hpp"

namespace anosov {

struct DeltaTooLarge : std::invalid_argument {
    explicit DeltaTooLarge(const std::string& msg) : std::invalid_argument(msg) {}
};

struct JunctionMismatch : std::runtime_error {
    explicit JunctionMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

struct EpsilonNotSmallEnough : std::runtime_error {
    explicit EpsilonNotSmallEnough(const std::string& msg) : std::runtime_error(msg) {}
};

struct NoDelta3 : std::runtime_error {
    explicit NoDelta3(const std::string& msg) : std::runtime_error(msg) {}
};

// Radial projection of the flattening construction: pi(q) = q/|q| on the
// global chart, and f_eps(q) = eps q + (1-eps) q/|q|. f_1 is the identity and
// S^2 is fixed pointwise for every eps.
Vec3 flatten_point(const Vec3& q, double epsilon);

// One tube of revolution around an obstacle axis, described in the
// per-obstacle chart. The waist sits on S^2 at the obstacle boundary circle;
// junctions at arclengths s_junction_minus/plus connect to the inner/outer
// sheet spheres.
struct TubeRegion {
    UnitVec3 axis;
    Vec3 frame_b1, frame_b2;  // orthonormal completion of the axis
    double obstacle_radius{0.0};
    double waist_chart_radius{0.0};  // R = tan(obstacle_radius / 2)
    double psi_junction{0.0};        // angular radius of the junction circles
    ProfileCurve profile;
    double s_junction_plus{0.0};   // junction arclength on the outer-sheet side
    double s_junction_minus{0.0};  // negative; inner-sheet side

    TubeRegion(UnitVec3 ax, double obst_radius, double psi_j, ProfileCurve prof)
        : axis(ax), obstacle_radius(obst_radius), psi_junction(psi_j), profile(std::move(prof)) {
        orthonormal_basis(axis.v, frame_b1, frame_b2);
        waist_chart_radius = std::tan(obst_radius / 2.0);
    }
};

// Round sheet sphere |q| = rho in the global chart (spherical ambient).
struct SheetSpec {
    double rho{1.0};
    double metric_radius{1.0};  // c = 2 rho / (1 + rho^2)
    double K{1.0};              // ((1 + rho^2) / (2 rho))^2
};

struct SurfaceAssembly {
    Ambient ambient{Ambient::spherical_stereographic};
    std::optional<BilliardTable> table;  // absent for standalone tubes
    double delta{0.0};
    double sheet_offset{0.0};
    double waist_curvature{0.0};
    double epsilon{1.0};
    SheetSpec sheet_inner;  // rho_1 = 1 - sheet_offset (flattened accordingly)
    SheetSpec sheet_outer;  // rho_2 = 1 / (1 - sheet_offset)
    std::vector<TubeRegion> tubes;
    int genus() const { return static_cast<int>(tubes.size()) - 1; }
};

// Builds the unflattened surface: sheet S1 at radius 1 - sheet_offset minus
// the enlarged disks, S2 its inversion image, and a C^2 tube of revolution
// per obstacle (circular-arc waist of the given curvature, quintic collars,
// exact inversion symmetry by construction). delta enlarges each obstacle
// radius for the junction circles and must keep the enlarged circles
// disjoint.
SurfaceAssembly build_sigma(const BilliardTable& table, double delta, double sheet_offset,
                            double waist_curvature);

struct BuildParams {
    double delta{0.0};
    double sheet_offset{0.0};
    double waist_curvature{0.0};
};

// Geometry-derived defaults: delta from the minimal obstacle gap, the sheet
// offset balanced against the in-chart collar width (tall thin tubes make
// the collar construction degenerate), waist radius a third of the smaller
// tube dimension.
BuildParams suggest_build_parameters(const BilliardTable& table);

// Applies the flattening map f_eps to the whole assembly (exact, in axis
// coordinates). Composition multiplies epsilons: flatten(flatten(S,1),e) =
// flatten(S,e) exactly.
SurfaceAssembly flatten(const SurfaceAssembly& assembly, double epsilon);

// Gauss curvature of a tube profile at arclength s in the assembly ambient.
double gauss_curvature(const TubeRegion& tube, double s);

struct AssumptionReport {
    bool transversality_pass{false};
    double transversality_worst_angle{0.0};  // min over samples, radians
    bool waist_second_form_pass{false};
    double waist_second_form_min{0.0};  // min |II(rho)| over waist samples
    bool symmetry_pass{false};
    double inversion_residual{0.0};  // max |q_mirror - q/|q|^2| over pairs
    double rotation_residual{0.0};
    bool all_pass() const {
        return transversality_pass && waist_second_form_pass && symmetry_pass;
    }
};

// Checks the three geodesic-transfer assumptions on a built assembly:
// (1) the radial direction is transverse to the surface away from the waists,
// (2) the vertical second fundamental form is nonzero on the waist circles,
// (3) tubes are invariant under inversion and rotation.
AssumptionReport verify_assumptions(const SurfaceAssembly& assembly);

struct FlatteningReport {
    bool ok{false};
    bool statement1_pass{false};
    bool statement2_pass{false};
    double t_c{0.0};            // crossover parameter (unflattened arclength)
    double min_k_ratio{0.0};    // min over (0, t_c) of k_eps / (m^4 / eps^2)
    double min_k_statement2{0.0};
    double max_Tz_statement2{0.0};
    std::string note;
};

// Flattens the profile by (r, z) -> (r, eps z) in its own plane and checks
// the two statements of the high-curvature flattening estimate: on (0, t_c)
// the flattened tangent stays vertical (T_z >= m) with curvature
// k_eps >= m^4/eps^2, and on (t_c, m) the tangent is flat (T_z <= m) with
// k_eps >= 0. Throws EpsilonNotSmallEnough when no crossover exists in
// (0, m).
FlatteningReport check_flattening_lemma(const ProfileCurve& profile, double epsilon, double m);

// Standalone tube of revolution in the Euclidean ambient for the
// counterexample analysis: a high-curvature cap of arclength delta2 from the
// obstacle rim, continued by a unit-curvature descent out to arclength
// s_extent. alpha_at_delta2 < -obstacle_radius/2 is the tangent angle reached
// at the end of the cap; delta3 (where the tangent is horizontal) is solved
// during construction.
struct EuclideanTubeParams {
    double obstacle_radius{0.55};
    double delta2{0.02};
    double alpha_at_delta2{-0.5};
    double turn_fraction{0.92};  // fraction of the cap with low curvature before the turn
    double s_extent{2.0};
};

struct EuclideanTube {
    SurfaceAssembly assembly;  // single tube, euclidean ambient, not mirrored
    double delta2{0.0};
    double delta3{0.0};  // arclength where the tangent is horizontal
};

EuclideanTube build_euclidean_tube(const EuclideanTubeParams& params);

// Standalone flattened spherical tube with the same waist radius, used as
// the contrast twin of the Euclidean obstruction experiment.
SurfaceAssembly build_standalone_spherical_tube(double obstacle_radius, double delta,
                                                double sheet_offset, double waist_curvature,
                                                double epsilon);

}  // namespace anosov
