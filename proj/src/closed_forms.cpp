#include "csbp/closed_forms.hpp"

#include <cmath>
#include <stdexcept>

#include "csbp/quadrature.hpp"

namespace csbp {

namespace {

// Gamma(s+alpha)/Gamma(s) continued through the poles of Gamma(s): the ratio
// vanishes where the denominator blows up, provided the numerator stays finite.
double gamma_ratio_shift(double alpha, double s) {
    const double num_arg = s + alpha;
    const bool num_pole = num_arg <= 0.0 && num_arg == std::floor(num_arg);
    const bool den_pole = s <= 0.0 && s == std::floor(s);
    if (alpha == 2.0) return s * (s + 1.0);  // polynomial, no poles at all
    if (num_pole) throw std::domain_error("xi exponent: numerator Gamma pole");
    if (den_pole) return 0.0;
    return gamma_fn(num_arg) / gamma_fn(s);
}

}  // namespace

double u_t(const StableParams& p, double t, double lambda) {
    if (t < 0.0) throw std::invalid_argument("u_t: t must be nonnegative");
    if (!(lambda > 0.0))
        throw std::invalid_argument("u_t: lambda must be positive (the lambda=0 limit is only defined through the extinction law)");
    const double am1 = p.alpha - 1.0;
    return std::pow(p.c_plus * am1 * t + std::pow(lambda, -am1), -1.0 / am1);
}

double u_t_infinity(const StableParams& p, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("u_t_infinity: t must be positive");
    const double am1 = p.alpha - 1.0;
    return std::pow(p.c_plus * am1 * t, -1.0 / am1);
}

double cb_laplace(const StableParams& p, double x, double t, double lambda) {
    if (x < 0.0) throw std::invalid_argument("cb_laplace: x must be nonnegative");
    return std::exp(-x * u_t(p, t, lambda));
}

double extinction_cdf(const StableParams& p, double x, double t) {
    if (!(x > 0.0) || !(t > 0.0))
        throw std::invalid_argument("extinction_cdf: x and t must be positive");
    return std::exp(-x * u_t_infinity(p, t));
}

double frechet_density(const StableParams& p, double x) {
    if (!(x > 0.0)) throw std::invalid_argument("frechet_density: x must be positive");
    const double am1 = p.alpha - 1.0;
    const double cax = p.c_plus * am1 * x;
    return p.c_plus * std::pow(cax, -p.alpha / am1) * std::exp(-std::pow(cax, -1.0 / am1));
}

double entrance_law_expectation(const StableParams& p, double m, double t,
                                const std::function<double(double)>& f, double tol) {
    if (!(m > 0.0) || !(t > 0.0))
        throw std::invalid_argument("entrance_law_expectation: m and t must be positive");
    const double am1 = p.alpha - 1.0;
    const double w_exp = -(2.0 * p.alpha - 1.0) / am1;
    const double scale = t * p.c_plus * am1;
    auto integrand = [&](double x) {
        const double weight = std::pow(x, w_exp) * std::exp(-std::pow(x, -1.0 / am1));
        if (weight == 0.0) return 0.0;
        return weight * f(std::pow(scale / x, 1.0 / am1));
    };
    return (p.c_plus / m) * integrate_semi_infinite(integrand, tol);
}

double cbi_entrance_laplace(const StableParams& p, double t, double lambda) {
    if (t < 0.0 || lambda < 0.0)
        throw std::invalid_argument("cbi_entrance_laplace: t and lambda must be nonnegative");
    const double am1 = p.alpha - 1.0;
    return std::pow(1.0 + p.c_plus * am1 * t * std::pow(lambda, am1), -p.alpha / am1);
}

double cbi_exact_laplace(const StableParams& p, double x, double t, double lambda) {
    if (x < 0.0) throw std::invalid_argument("cbi_exact_laplace: x must be nonnegative");
    const double u = u_t(p, t, lambda);
    return std::exp(-x * u) * std::pow(u / lambda, p.alpha);
}

double qs_limit(const StableParams& p, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("qs_limit: lambda must be positive");
    const double am1 = p.alpha - 1.0;
    return 1.0 - std::pow(1.0 + std::pow(lambda, -am1), -1.0 / am1);
}

double cbi_qs_limit(const StableParams& p, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("cbi_qs_limit: lambda must be positive");
    const double am1 = p.alpha - 1.0;
    return std::pow(std::pow(lambda, am1) + 1.0, -p.alpha / am1);
}

double survival_conditioned_laplace_exact(const StableParams& p, double x, double t,
                                          double lambda) {
    const double ext = extinction_cdf(p, x, t);
    return (cb_laplace(p, x, t, lambda) - ext) / (1.0 - ext);
}

double cb_infimum_before_last_passage(double alpha, double y, double z) {
    if (!(y > 0.0)) throw std::invalid_argument("cb_infimum_before_last_passage: y must be positive");
    if (z > y) return 0.0;
    if (z <= 0.0) return 1.0;
    return std::pow((y - z) / y, alpha - 1.0);
}

double levy_infimum_before_last_passage(double alpha, double u, double v) {
    if (!(u < 0.0) || !(v < u))
        throw std::invalid_argument("levy_infimum_before_last_passage: need v < u < 0");
    return std::pow(1.0 - std::exp(v - u), alpha - 1.0);
}

double two_sided_exit(const StableParams& p, double x, double a, double q, ExitBranch branch) {
    if (!(x > 0.0) || !(a >= x)) throw std::invalid_argument("two_sided_exit: need 0 < x <= a");
    if (q < 0.0) throw std::invalid_argument("two_sided_exit: q must be nonnegative");
    const double wa = scale_W(p, q, a);
    const double wax = scale_W(p, q, a - x);
    if (branch == ExitBranch::downward) return wax / wa;
    return scale_Z(p, q, a - x) - wax * scale_Z(p, q, a) / wa;
}

double exp_functional_transform(const StableParams& p, double a, double q,
                                ExpFunctionalBranch branch) {
    if (!(a > 0.0) || !(q > 0.0))
        throw std::invalid_argument("exp_functional_transform: a and q must be positive");
    const double qe = q / p.c_plus;
    const double inner = qe * std::pow(std::expm1(a), p.alpha);
    const double outer = qe * std::exp(p.alpha * a);
    const double front = std::pow(-std::expm1(-a), p.alpha - 1.0);
    const double d_ratio = mittag_leffler_deriv(p.alpha, inner).value /
                           mittag_leffler_deriv(p.alpha, outer).value;
    if (branch == ExpFunctionalBranch::never_crossed) return front * d_ratio;
    return mittag_leffler(p.alpha, inner).value -
           front * d_ratio * mittag_leffler(p.alpha, outer).value;
}

double recip_exp_functional_transform(const StableParams& p, double m_star, double lambda) {
    if (!(m_star > 0.0) || lambda < 0.0)
        throw std::invalid_argument("recip_exp_functional_transform: bad arguments");
    return m_star * (p.alpha - 1.0) * cbi_entrance_laplace(p, 1.0, lambda);
}

double sup_before_last_passage(double m_star, double y, double z) {
    if (!(y > 0.0) || !(z >= y)) throw std::invalid_argument("sup_before_last_passage: need z >= y > 0");
    if (!(m_star * z >= y))
        throw std::domain_error("sup_before_last_passage: m*z < y puts the formula outside [0,1]");
    return 1.0 - y / (m_star * z);
}

double xi_exponent(double alpha, double m, double lambda) {
    if (!(m > 0.0)) throw std::invalid_argument("xi_exponent: m must be positive");
    return m * gamma_ratio_shift(alpha, lambda) / gamma_fn(alpha);
}

double xi_star_exponent(double alpha, double m_star, double lambda) {
    if (!(m_star > 0.0)) throw std::invalid_argument("xi_star_exponent: m* must be positive");
    return m_star * gamma_ratio_shift(alpha, lambda - 1.0) / gamma_fn(alpha);
}

double extinction_tail_asymptotic(const StableParams& p, double t) {
    return u_t_infinity(p, t);
}

}  // namespace csbp
