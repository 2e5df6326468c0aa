// Adaptive Simpson quadrature used as an independent integration reference.
#pragma once

#include <cmath>
#include <functional>

namespace oracle {

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adapt(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(f, a, m, fa, flm, fm);
    const double right = simpson(f, m, b, fm, frm, fb);
    if (depth <= 0) return left + right;
    if (std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

inline double integrate_1d(const std::function<double(double)>& f, double a, double b,
                           double tol = 1e-10, int depth = 40) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = detail::simpson(f, a, b, fa, fm, fb);
    return detail::adapt(f, a, b, fa, fm, fb, whole, tol, depth);
}

/// Integral over the disk of radius R in polar coordinates (adaptive in both
/// the radial and the angular direction).
inline double integrate_disk(const std::function<double(double, double)>& f, double R,
                             double tol = 1e-9) {
    auto ring = [&](double theta) {
        return integrate_1d([&](double r) { return r * f(r * std::cos(theta), r * std::sin(theta)); },
                            0.0, R, tol * 0.02);
    };
    return integrate_1d(ring, 0.0, 2.0 * 3.14159265358979323846, tol);
}

/// Integral over an axis-aligned box (adaptive tensor Simpson).
inline double integrate_box(const std::function<double(double, double)>& f, double x0, double x1,
                            double y0, double y1, double tol = 1e-9) {
    auto strip = [&](double y) {
        return integrate_1d([&](double x) { return f(x, y); }, x0, x1, tol * 0.02);
    };
    return integrate_1d(strip, y0, y1, tol);
}

}  // namespace oracle
