#include "csbp/special_functions.hpp"

#include <cmath>
#include <stdexcept>

namespace csbp {

namespace {

constexpr double kLanczosG = 7.0;
constexpr double kLanczos[9] = {
    0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
    771.32342877765313,       -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};

double lanczos_core(double x) {
    // Gamma(x) for x >= 0.5
    double acc = kLanczos[0];
    for (int i = 1; i < 9; ++i) acc += kLanczos[i] / (x - 1.0 + i);
    const double t = x - 0.5 + kLanczosG;
    return std::sqrt(2.0 * M_PI) * std::pow(t, x - 0.5) * std::exp(-t) * acc;
}

constexpr double kMlArgGuard = 30.0;
constexpr int kMlMaxTerms = 512;

// sum of sign_n * exp(log_n) style series for E_alpha and its derivative
SpecialFnResult ml_series(double alpha, double x, bool derivative) {
    if (!(alpha > 0.0) || !(alpha <= 2.0))
        throw std::invalid_argument("mittag_leffler: alpha must lie in (0,2]");
    if (!std::isfinite(x)) throw std::invalid_argument("mittag_leffler: non-finite argument");
    if (std::abs(x) > kMlArgGuard)
        throw std::range_error("mittag_leffler: |x| exceeds the series guard (30)");

    const double lax = x == 0.0 ? 0.0 : std::log(std::abs(x));
    double sum = derivative ? 0.0 : 1.0;  // n = 0 term
    double prev_mag = derivative ? 0.0 : 1.0;
    double tail_bound = 0.0;
    bool past_peak = false;

    for (int n = 1; n <= kMlMaxTerms; ++n) {
        // term_n = x^n / Gamma(1+alpha n), or n x^{n-1}/Gamma(1+alpha n)
        const int pw = derivative ? n - 1 : n;
        if (x == 0.0 && pw > 0) {
            tail_bound = 0.0;
            break;
        }
        double lmag = pw * lax - log_gamma_fn(1.0 + alpha * n);
        if (derivative) lmag += std::log(static_cast<double>(n));
        const double mag = std::exp(lmag);
        const double term = (x < 0.0 && (pw & 1)) ? -mag : mag;
        sum += term;
        past_peak = past_peak || mag < prev_mag;
        prev_mag = mag;
        if (past_peak && mag < 1e-17 * std::abs(sum) + 1e-300) {
            tail_bound = 2.0 * mag;  // next terms shrink at least geometrically here
            break;
        }
        if (n == kMlMaxTerms)
            throw std::runtime_error("mittag_leffler: series did not converge");
    }
    return SpecialFnResult{sum, tail_bound};
}

}  // namespace

double gamma_fn(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("gamma_fn: non-finite argument");
    if (x < 0.5) {
        if (x <= 0.0 && x == std::floor(x))
            throw std::domain_error("gamma_fn: pole at nonpositive integer");
        return M_PI / (std::sin(M_PI * x) * lanczos_core(1.0 - x));
    }
    return lanczos_core(x);
}

double log_gamma_fn(double x) {
    if (!(x > 0.0)) throw std::domain_error("log_gamma_fn: requires x > 0");
    if (x < 0.5) return std::log(M_PI / std::sin(M_PI * x)) - log_gamma_fn(1.0 - x);
    double acc = kLanczos[0];
    for (int i = 1; i < 9; ++i) acc += kLanczos[i] / (x - 1.0 + i);
    const double t = x - 0.5 + kLanczosG;
    return 0.5 * std::log(2.0 * M_PI) + (x - 0.5) * std::log(t) - t + std::log(acc);
}

SpecialFnResult mittag_leffler(double alpha, double x) { return ml_series(alpha, x, false); }

SpecialFnResult mittag_leffler_deriv(double alpha, double x) { return ml_series(alpha, x, true); }

double scale_W(const StableParams& p, double q, double x) {
    if (q < 0.0) throw std::invalid_argument("scale_W: q must be nonnegative");
    if (x < 0.0) return 0.0;
    if (x == 0.0) return 0.0;
    if (q == 0.0) return std::pow(x, p.alpha - 1.0) / (p.c_plus * gamma_fn(p.alpha));
    const double arg = (q / p.c_plus) * std::pow(x, p.alpha);
    return (p.alpha / p.c_plus) * std::pow(x, p.alpha - 1.0) * mittag_leffler_deriv(p.alpha, arg).value;
}

double scale_Z(const StableParams& p, double q, double x) {
    if (q < 0.0) throw std::invalid_argument("scale_Z: q must be nonnegative");
    if (x <= 0.0 || q == 0.0) return 1.0;
    const double arg = (q / p.c_plus) * std::pow(x, p.alpha);
    return mittag_leffler(p.alpha, arg).value;
}

}  // namespace csbp
