#pragma once

#include <functional>

#include "csbp/special_functions.hpp"
#include "csbp/stable.hpp"

namespace csbp {

/// Laplace exponents of the two Levy processes underlying the self-similar
/// representations: xi (drifts down, mean of -xi is m) and xi* (drifts up,
/// mean m*). Both are used at exponent level only.
struct XiExponents {
    double alpha;
    double m;
    double m_star;

    /// m fixed so the entrance law integrates to one: m = c_plus*(alpha-1)*Gamma(alpha).
    static double canonical_m(const StableParams& p) {
        return p.c_plus * (p.alpha - 1.0) * gamma_fn(p.alpha);
    }
};

/// u_t(lambda) = [c_plus(alpha-1) t + lambda^{-(alpha-1)}]^{-1/(alpha-1)};
/// the branching cumulant: E_x exp(-lambda Y_t) = exp(-x u_t(lambda)).
double u_t(const StableParams& p, double t, double lambda);

/// lambda -> infinity limit of u_t: [c_plus(alpha-1) t]^{-1/(alpha-1)}.
double u_t_infinity(const StableParams& p, double t);

double cb_laplace(const StableParams& p, double x, double t, double lambda);

/// P_x(T0 <= t) = exp(-x [c_plus(alpha-1) t]^{-1/(alpha-1)}): Frechet law of
/// the extinction time; at x = 1 the law of the exponential functional I.
double extinction_cdf(const StableParams& p, double x, double t);

/// Density of I, the exact derivative of extinction_cdf at x = 1; integrates
/// to one. (The prefactor is c_plus*(c_plus(alpha-1)x)^{-alpha/(alpha-1)}.)
double frechet_density(const StableParams& p, double x);

/// Entrance law of the time-reversed process at time t, as an expectation of
/// a bounded f:
///   (c_plus/m) * int_0^inf x^{-(2a-1)/(a-1)} f((t c_plus (a-1)/x)^{1/(a-1)})
///                 e^{-x^{-1/(a-1)}} dx.
/// With m = canonical_m this is a probability law; it is the law of c_t * G
/// with G ~ Gamma(alpha, 1) and c_t = [c_plus(alpha-1)t]^{1/(alpha-1)}, and
/// scales self-similarly as t^{1/(alpha-1)}.
double entrance_law_expectation(const StableParams& p, double m, double t,
                                const std::function<double(double)>& f, double tol = 1e-10);

/// CBI entrance law transform: (1 + c_plus(alpha-1) t lambda^{alpha-1})^{-alpha/(alpha-1)}.
double cbi_entrance_laplace(const StableParams& p, double t, double lambda);

/// Conditioned-on-nonextinction transform from x:
///   exp(-x u_t(lambda)) psi(u_t(lambda)) / psi(lambda).
double cbi_exact_laplace(const StableParams& p, double x, double t, double lambda);

/// Quasi-stationary limit of E_x(e^{-lambda Y_t / c_t} | survival):
///   1 - [1 + lambda^{-(alpha-1)}]^{-1/(alpha-1)}.
double qs_limit(const StableParams& p, double lambda);

/// Same rescaling limit for the conditioned process:
///   [lambda^{alpha-1} + 1]^{-alpha/(alpha-1)}.
double cbi_qs_limit(const StableParams& p, double lambda);

/// Exact finite-t survival-conditioned transform, assembled from cb_laplace
/// and extinction_cdf (the conditioning event has probability 1 - extinction).
double survival_conditioned_laplace_exact(const StableParams& p, double x, double t,
                                          double lambda);

/// P_x(inf over [0, U_y] of Y >= z) = ((y-z)/y)^{alpha-1} on 0 <= z <= y,
/// where U_y is the last passage of the branching process at level y.
double cb_infimum_before_last_passage(double alpha, double y, double z);

/// P(inf over [0, D_u] of xi >= v) = (1 - e^{v-u})^{alpha-1} for v < u < 0,
/// D_u the last passage of xi at u.
double levy_infimum_before_last_passage(double alpha, double u, double v);

enum class ExitBranch {
    upward,    // discounted passage above a before extinction
    downward,  // extinction before passage above a
};

/// Progeny-discounted two-sided exit from [0,a] started at x:
///   upward:   Z^(q)(a-x) - W^(q)(a-x) Z^(q)(a)/W^(q)(a)
///   downward: W^(q)(a-x)/W^(q)(a)
double two_sided_exit(const StableParams& p, double x, double a, double q, ExitBranch branch);

enum class ExpFunctionalBranch {
    crossed,        // functional of xi up to its passage above a, on {passage finite}
    never_crossed,  // total functional of xi on {never passes above a}
};

/// Mittag-Leffler transforms of exponential functionals of xi; algebraically
/// the two_sided_exit formulas under x = 1, barrier e^a, discount scaled by
/// 1/c_plus, but evaluated through E_alpha and E'_alpha directly.
double exp_functional_transform(const StableParams& p, double a, double q,
                                ExpFunctionalBranch branch);

/// E[e^{-lambda/I*} (1/I*)^{1}] = m*(alpha-1)(1 + c_plus(alpha-1)lambda^{alpha-1})^{-alpha/(alpha-1)}.
double recip_exp_functional_transform(const StableParams& p, double m_star, double lambda);

/// P(sup of the conditioned process before its last passage below y is <= z)
/// = 1 - y/(m* z), for z >= y > 0 and m* z >= y.
double sup_before_last_passage(double m_star, double y, double z);

/// Psi(lambda) = m Gamma(lambda+alpha) / (Gamma(lambda) Gamma(alpha)), with
/// denominator poles mapped to exact zeros (so Psi(0) = Psi(-1) = 0 exactly)
/// and numerator poles rejected.
double xi_exponent(double alpha, double m, double lambda);

/// Psi*(lambda) = m* Gamma(lambda-1+alpha) / (Gamma(lambda-1) Gamma(alpha));
/// exact zeros at lambda = 1, 0, -1, ...
double xi_star_exponent(double alpha, double m_star, double lambda);

/// Asymptotic tail P(I > t) ~ [c_plus(alpha-1) t]^{-1/(alpha-1)}.
double extinction_tail_asymptotic(const StableParams& p, double t);

}  // namespace csbp
