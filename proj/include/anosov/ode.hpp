#pragma once
// Embedded Dormand-Prince 5(4) integrator with dense output, for small
// fixed-size systems (geodesic + Jacobi states).

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace anosov {

struct StepUnderflow : std::runtime_error {
    StepUnderflow() : std::runtime_error("adaptive step fell below 1e-14") {}
};

template <int N>
using OdeState = std::array<double, N>;

// Dense output over one accepted step (Shampine's quartic interpolant, as in
// Hairer's DOPRI5).
template <int N>
struct DenseSegment {
    double t0{0.0}, h{0.0};
    std::array<OdeState<N>, 5> rcont{};

    double t1() const { return t0 + h; }

    OdeState<N> eval(double t) const {
        const double s = (t - t0) / h;
        const double s1 = 1.0 - s;
        OdeState<N> y{};
        for (int i = 0; i < N; ++i)
            y[i] = rcont[0][i] +
                   s * (rcont[1][i] + s1 * (rcont[2][i] + s * (rcont[3][i] + s1 * rcont[4][i])));
        return y;
    }
};

// Integrates y' = f(t, y) from t0 to t1 > t0 with local tolerance tol. After
// each accepted step, on_step (if given) inspects the dense segment and may
// return a time tc inside it to truncate the integration there (event
// location); returning NaN continues. The state y is updated in place; the
// time actually reached is returned.
// max_step, when given, caps the step size from the current state; it is the
// caller's guard against stepping over thin stiff layers that the embedded
// error estimate cannot see.
template <int N>
double integrate_ode(const std::function<void(double, const OdeState<N>&, OdeState<N>&)>& f,
                     OdeState<N>& y, double t0, double t1, double tol,
                     const std::function<double(const DenseSegment<N>&)>& on_step = nullptr,
                     const std::function<double(double, const OdeState<N>&)>& max_step = nullptr) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double d1 = -12715105075.0 / 11282082432.0;
    static constexpr double d3 = 87487479700.0 / 32700410799.0;
    static constexpr double d4 = -10690763975.0 / 1880347072.0;
    static constexpr double d5 = 701980252875.0 / 199316789632.0;
    static constexpr double d6 = -1453857185.0 / 822651844.0;
    static constexpr double d7 = 69997945.0 / 29380423.0;

    if (!(t1 > t0)) return t0;
    double t = t0;
    double h = std::min(t1 - t0, 1e-2);

    OdeState<N> k1, k2, k3, k4, k5, k6, k7, ytmp, y5;
    f(t, y, k1);

    while (t < t1) {
        if (h < 1e-14) throw StepUnderflow();
        double h_use = h;
        if (max_step) h_use = std::min(h_use, std::max(max_step(t, y), 1e-13));
        bool clipped = false;
        if (t + h_use >= t1) {
            h_use = t1 - t;
            clipped = true;
        }
        const double h_att = h_use;

        for (int i = 0; i < N; ++i) ytmp[i] = y[i] + h_use * a21 * k1[i];
        f(t + c2 * h_use, ytmp, k2);
        for (int i = 0; i < N; ++i) ytmp[i] = y[i] + h_use * (a31 * k1[i] + a32 * k2[i]);
        f(t + c3 * h_use, ytmp, k3);
        for (int i = 0; i < N; ++i) ytmp[i] = y[i] + h_use * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(t + c4 * h_use, ytmp, k4);
        for (int i = 0; i < N; ++i)
            ytmp[i] = y[i] + h_use * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(t + c5 * h_use, ytmp, k5);
        for (int i = 0; i < N; ++i)
            ytmp[i] =
                y[i] + h_use * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        f(t + h_use, ytmp, k6);
        for (int i = 0; i < N; ++i)
            y5[i] = y[i] + h_use * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        f(t + h_use, y5, k7);

        double err = 0.0;
        for (int i = 0; i < N; ++i) {
            const double e = h_use * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                                  e7 * k7[i]);
            const double sc = tol * (1.0 + std::max(std::abs(y[i]), std::abs(y5[i])));
            err += (e / sc) * (e / sc);
        }
        err = std::sqrt(err / N);

        if (err <= 1.0) {
            if (on_step) {
                DenseSegment<N> seg;
                seg.t0 = t;
                seg.h = h_use;
                for (int i = 0; i < N; ++i) {
                    const double ydiff = y5[i] - y[i];
                    const double bspl = h_use * k1[i] - ydiff;
                    seg.rcont[0][i] = y[i];
                    seg.rcont[1][i] = ydiff;
                    seg.rcont[2][i] = bspl;
                    seg.rcont[3][i] = ydiff - h_use * k7[i] - bspl;
                    seg.rcont[4][i] = h_use * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                           d6 * k6[i] + d7 * k7[i]);
                }
                const double tc = on_step(seg);
                if (!std::isnan(tc)) {
                    y = seg.eval(tc);
                    return tc;
                }
            }
            t += h_use;
            y = y5;
            k1 = k7;  // FSAL
            if (clipped) break;
        }

        const double fac =
            (err <= 1e-30) ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
        h = h_att * fac;
    }
    return t;
}

// Locate a root of g inside a dense segment by bisection on [lo, hi], where
// g(lo) and g(hi) have opposite signs. Resolves the time to tol_t.
template <int N>
double bisect_segment(const DenseSegment<N>& seg, const std::function<double(const OdeState<N>&)>& g,
                      double lo, double hi, double tol_t = 1e-12) {
    double glo = g(seg.eval(lo));
    for (int it = 0; it < 200 && hi - lo > tol_t; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(seg.eval(mid));
        if ((glo <= 0.0) == (gm <= 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace anosov
