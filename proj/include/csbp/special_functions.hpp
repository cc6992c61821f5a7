#pragma once

#include "csbp/stable.hpp"

namespace csbp {

/// Scalar special-function evaluation with a bound on the truncation error of
/// the series actually summed.
struct SpecialFnResult {
    double value;
    double abs_error_estimate;
};

/// Gamma function, Lanczos approximation (g = 7) with reflection for x < 1/2.
/// Poles at nonpositive integers are rejected.
double gamma_fn(double x);

/// log Gamma for x > 0.
double log_gamma_fn(double x);

/// Mittag-Leffler series sum_{n>=0} x^n / Gamma(1 + alpha*n).
/// alpha in (0,2] (values below 1 admitted for testing); |x| <= 30, larger
/// arguments raise std::range_error rather than extending the series to the
/// asymptotic regime.
SpecialFnResult mittag_leffler(double alpha, double x);

/// Term-wise differentiated series sum_{n>=1} n x^{n-1} / Gamma(1 + alpha*n).
SpecialFnResult mittag_leffler_deriv(double alpha, double x);

/// q-scale function of psi(l) = c_plus*l^alpha: zero on x < 0, and for x >= 0
///   W^(q)(x) = (alpha/c_plus) x^{alpha-1} E'_alpha((q/c_plus) x^alpha),
/// the unique function with Laplace transform 1/(psi(l) - q) for l > Phi(q).
/// The c_plus scaling follows from 1/(c l^a - q) = (1/c)/(l^a - q/c).
double scale_W(const StableParams& p, double q, double x);

/// Companion function Z^(q)(x) = 1 + q * int_0^x W^(q); equals 1 for x <= 0
/// and E_alpha((q/c_plus) x^alpha) above.
double scale_Z(const StableParams& p, double q, double x);

}  // namespace csbp
