#pragma once
// Second-order jets in one parameter: value, first and second derivative.
// Profile pieces and chart transitions are written once in jets, so all
// curvature formulas get exact derivatives through composition (including the
// flattening map).

#include <cmath>

namespace anosov {

struct Jet2 {
    double f{0.0};
    double df{0.0};
    double ddf{0.0};

    static Jet2 constant(double c) { return {c, 0.0, 0.0}; }
    static Jet2 variable(double t) { return {t, 1.0, 0.0}; }

    Jet2 operator+(const Jet2& o) const { return {f + o.f, df + o.df, ddf + o.ddf}; }
    Jet2 operator-(const Jet2& o) const { return {f - o.f, df - o.df, ddf - o.ddf}; }
    Jet2 operator-() const { return {-f, -df, -ddf}; }
    Jet2 operator*(const Jet2& o) const {
        return {f * o.f, df * o.f + f * o.df, ddf * o.f + 2.0 * df * o.df + f * o.ddf};
    }
    Jet2 operator/(const Jet2& o) const {
        const double q = f / o.f;
        const double dq = (df - q * o.df) / o.f;
        const double ddq = (ddf - 2.0 * dq * o.df - q * o.ddf) / o.f;
        return {q, dq, ddq};
    }

    Jet2 operator+(double c) const { return {f + c, df, ddf}; }
    Jet2 operator-(double c) const { return {f - c, df, ddf}; }
    Jet2 operator*(double c) const { return {f * c, df * c, ddf * c}; }
    Jet2 operator/(double c) const { return {f / c, df / c, ddf / c}; }

    friend Jet2 operator+(double c, const Jet2& j) { return j + c; }
    friend Jet2 operator-(double c, const Jet2& j) { return {c - j.f, -j.df, -j.ddf}; }
    friend Jet2 operator*(double c, const Jet2& j) { return j * c; }
    friend Jet2 operator/(double c, const Jet2& j) { return Jet2::constant(c) / j; }
};

inline Jet2 sin(const Jet2& x) {
    const double s = std::sin(x.f), c = std::cos(x.f);
    return {s, c * x.df, c * x.ddf - s * x.df * x.df};
}

inline Jet2 cos(const Jet2& x) {
    const double s = std::sin(x.f), c = std::cos(x.f);
    return {c, -s * x.df, -s * x.ddf - c * x.df * x.df};
}

inline Jet2 sqrt(const Jet2& x) {
    const double s = std::sqrt(x.f);
    const double ds = x.df / (2.0 * s);
    return {s, ds, (x.ddf - 2.0 * ds * ds) / (2.0 * s)};
}

// atan2 jet along a curve (y(t), x(t)).
inline Jet2 atan2(const Jet2& y, const Jet2& x) {
    const double n = x.f * y.df - y.f * x.df;
    const double dn = x.f * y.ddf - y.f * x.ddf;
    const double d = x.f * x.f + y.f * y.f;
    const double dd = 2.0 * (x.f * x.df + y.f * y.df);
    return {std::atan2(y.f, x.f), n / d, (dn * d - n * dd) / (d * d)};
}

// Composition g(h(t)) where g is given as a jet in its own variable evaluated
// at h.f, and h is a jet in t.
inline Jet2 compose(const Jet2& g, const Jet2& h) {
    return {g.f, g.df * h.df, g.ddf * h.df * h.df + g.df * h.ddf};
}

}  // namespace anosov
