#pragma once
// Revolution-surface profile curves in a per-obstacle chart. A profile is a
// list of analytic pieces t -> (r(t), z(t)) given as second-order jets; the
// curve composes optional mirror symmetry (z -> -z for s < 0) and the exact
// flattening map, then provides arclength-parametrized geometry: metric
// radius, principal curvatures, Gauss curvature in either ambient.
//
// In the per-obstacle stereographic chart the great sphere S^2 is the plane
// z = 0, the ambient metric is xi^2 g_eucl with xi = 2/(1 + r^2 + z^2), and
// inversion with respect to S^2 is the mirror z -> -z.

#include <functional>
#include <stdexcept>
#include <vector>

#include "anosov/jet.hpp"

namespace anosov {

enum class Ambient { spherical_stereographic, euclidean };

using PieceFn = std::function<void(const Jet2& t, Jet2& r, Jet2& z)>;

struct ProfilePiece {
    PieceFn fn;
    double t0{0.0};
    double t1{1.0};
};

// Geometry of the profile at one arclength value. Jets are with respect to
// the chart parameter of the underlying piece; exposed values are already
// converted to arclength derivatives where applicable.
struct ProfileSample {
    double s{0.0};
    double r{0.0}, z{0.0};
    double T_r{0.0}, T_z{0.0};   // in-chart Euclidean unit tangent
    double k_prof{0.0};          // in-chart profile curvature w.r.t. n = (T_z, -T_r)
    double xi{1.0};              // conformal factor (1 in the Euclidean ambient)
    double gamma{0.0};           // metric radius xi * r
    double dgamma{0.0};          // d gamma / ds (ambient arclength)
    double k1{0.0}, k2{0.0};     // principal curvatures in the ambient metric
    double K{0.0};               // Gauss curvature
};

struct DomainError : std::out_of_range {
    explicit DomainError(double s)
        : std::out_of_range("arclength outside the profile domain: s = " + std::to_string(s)) {}
};

// Axis coordinates (psi, rho) of a chart point: rho = |q| in the global
// stereographic chart and psi the angle from the obstacle axis. The
// flattening map acts as rho -> eps*rho + 1 - eps with psi fixed.
void chart_to_axis(const Jet2& r, const Jet2& z, Jet2& psi, Jet2& rho);
void axis_to_chart(const Jet2& psi, const Jet2& rho, Jet2& r, Jet2& z);

class ProfileCurve {
  public:
    // Pieces describe the s >= 0 half (starting at the waist for mirrored
    // tubes), traversed in order with increasing arclength. If mirrored, the
    // s < 0 half is the exact z -> -z image of the base pieces, composed
    // before flattening. epsilon = 1 applies no flattening.
    ProfileCurve(std::vector<ProfilePiece> pieces, Ambient ambient, bool mirrored,
                 double epsilon = 1.0);

    Ambient ambient() const { return ambient_; }
    bool mirrored() const { return mirrored_; }
    double epsilon() const { return epsilon_; }
    const std::vector<ProfilePiece>& base_pieces() const { return base_; }
    double s_min() const { return s_min_; }
    double s_max() const { return s_max_; }

    ProfileSample at(double s) const;

    double gauss_curvature(double s) const { return at(s).K; }
    double metric_radius(double s) const { return at(s).gamma; }

    // Arclength of the end of base piece i (s >= 0 side), after mirroring
    // and flattening are taken into account.
    double piece_end_s(std::size_t i) const { return upper_.piece_end_s[i]; }
    // Same boundary on the mirrored s < 0 side (negative value).
    double piece_end_s_lower(std::size_t i) const {
        return mirrored_ ? -lower_.piece_end_s[i] : s_min_;
    }

  private:
    struct Half {
        // Composed piece functions (mirror/flatten applied), same order as
        // the base pieces.
        std::vector<ProfilePiece> pieces;
        std::vector<double> piece_end_s;  // cumulative arclength at piece ends
        // Inverse arclength tables per piece: nodes of (s, t, dt/ds, d2t/ds2).
        struct Node {
            double s, t, dt, ddt;
        };
        std::vector<std::vector<Node>> tables;
        double length{0.0};
    };

    void build_half(Half& half, bool mirror) const;
    ProfileSample eval_half(const Half& half, double s_abs, bool negate_z) const;
    double speed(const Half& half, std::size_t piece, double t) const;
    void speed_and_deriv(const Half& half, std::size_t piece, double t, double& sp,
                         double& dsp) const;

    std::vector<ProfilePiece> base_;
    Ambient ambient_;
    bool mirrored_;
    double epsilon_;
    Half upper_, lower_;
    double s_min_{0.0}, s_max_{0.0};
};

// Piece factories.
ProfilePiece make_arc_piece(double r0, double radius, double phi1);
ProfilePiece make_quintic_piece(const double cr[6], const double cz[6]);
ProfilePiece make_sheet_piece(double rho, double psi_from, double psi_to);

// Quintic two-point Taylor coefficients from endpoint position, first and
// second parameter derivatives.
void quintic_coefficients(double p0, double d0, double dd0, double p1, double d1, double dd1,
                          double out[6]);

}  // namespace anosov
