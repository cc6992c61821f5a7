#pragma once

#include <cmath>
#include <stdexcept>

namespace csbp {

/// Adaptive Simpson on [a,b] to absolute tolerance `tol`. Subdivision is
/// capped; hitting the cap is an error, never a silent partial result.
template <typename F>
double integrate(F&& f, double a, double b, double tol = 1e-10, int max_depth = 48) {
    struct Impl {
        const F& f;
        double width_floor;  // bounded jumps contribute at most |jump|*width here
        static double simpson(double a, double fa, double b, double fb, double fm) {
            return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        }
        double recurse(double a, double fa, double b, double fb, double m, double fm, double whole,
                       double tol, int depth) {
            const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            const double flm = f(lm), frm = f(rm);
            const double left = simpson(a, fa, m, fm, flm);
            const double right = simpson(m, fm, b, fb, frm);
            const double delta = left + right - whole;
            if (std::abs(delta) <= 15.0 * tol || (b - a) <= width_floor)
                return left + right + delta / 15.0;
            if (depth <= 0)
                throw std::runtime_error("integrate: adaptive quadrature failed to converge");
            return recurse(a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
                   recurse(m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
        }
    } impl{f, 1e-13 * (b - a)};
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = Impl::simpson(a, fa, b, fb, fm);
    return impl.recurse(a, fa, b, fb, m, fm, whole, tol, max_depth);
}

/// Integral over (0, inf) via the substitution x = s/(1-s). The integrand must
/// vanish fast enough at both ends for the transformed function to stay
/// bounded; all uses here do (essential singularity at 0, algebraic decay of
/// order < -2 at infinity).
template <typename F>
double integrate_semi_infinite(F&& f, double tol = 1e-10) {
    auto g = [&f](double s) {
        if (s <= 0.0 || s >= 1.0) return 0.0;
        const double one_minus = 1.0 - s;
        const double x = s / one_minus;
        const double v = f(x) / (one_minus * one_minus);
        return std::isfinite(v) ? v : 0.0;
    };
    return integrate(g, 0.0, 1.0, tol);
}

}  // namespace csbp
