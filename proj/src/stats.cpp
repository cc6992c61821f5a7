#include "csbp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "csbp/rng.hpp"

namespace csbp {

double pairwise_sum(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n <= 32) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

MCEstimate summarize(std::span<const double> values, std::uint64_t seed) {
    const std::size_t n = values.size();
    if (n < 2) throw std::invalid_argument("summarize: need at least two samples");
    const double mean = pairwise_sum(values) / static_cast<double>(n);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = values[i] - mean;
        sq[i] = d * d;
    }
    const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
    return MCEstimate{mean, std::sqrt(var / static_cast<double>(n)), n, seed};
}

double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 128; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-14) break;
        sign = -sign;
    }
    return std::min(1.0, std::max(0.0, 2.0 * sum));
}

double ks_p_value(double statistic, double n_effective) {
    const double sn = std::sqrt(n_effective);
    return kolmogorov_q((sn + 0.12 + 0.11 / sn) * statistic);
}

KSResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.size() < 50) throw std::invalid_argument("ks_test: need at least 50 samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::max(f - static_cast<double>(i) / n,
                                 static_cast<double>(i + 1) / n - f));
    }
    return KSResult{d, ks_p_value(d, n)};
}

KSResult ks_test_censored(std::vector<double> samples, const std::function<double(double)>& cdf,
                          double censor_point) {
    if (samples.size() < 50)
        throw std::invalid_argument("ks_test_censored: need at least 50 samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    std::size_t observed = samples.size();
    while (observed > 0 && !(samples[observed - 1] <= censor_point)) --observed;

    double d = 0.0;
    for (std::size_t i = 0; i < observed; ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::max(f - static_cast<double>(i) / n,
                                 static_cast<double>(i + 1) / n - f));
    }
    const double censored_frac = (n - static_cast<double>(observed)) / n;
    d = std::max(d, std::max(censored_frac, 1.0 - cdf(censor_point)));
    return KSResult{d, ks_p_value(d, n)};
}

KSResult ks_test_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("ks_test_two_sample: samples too small");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = na * nb / (na + nb);
    return KSResult{d, ks_p_value(d, ne)};
}

double effective_sample_size(std::span<const double> weights) {
    const double s1 = pairwise_sum(weights);
    std::vector<double> sq(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) sq[i] = weights[i] * weights[i];
    const double s2 = pairwise_sum(sq);
    return s2 > 0.0 ? s1 * s1 / s2 : 0.0;
}

std::vector<std::size_t> systematic_resample(std::span<const double> weights, std::size_t m,
                                             std::uint64_t seed) {
    const double total = pairwise_sum(weights);
    if (!(total > 0.0) || m == 0)
        throw std::invalid_argument("systematic_resample: nonpositive total weight");
    PathRng rng(seed, 0xE5A1u);
    const double stride = total / static_cast<double>(m);
    double pos = rng.uniform() * stride;
    std::vector<std::size_t> out;
    out.reserve(m);
    double cum = 0.0;
    std::size_t i = 0;
    for (std::size_t k = 0; k < m; ++k) {
        const double target = pos + static_cast<double>(k) * stride;
        while (i + 1 < weights.size() && cum + weights[i] < target) {
            cum += weights[i];
            ++i;
        }
        out.push_back(i);
    }
    return out;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 3)
        throw std::invalid_argument("least_squares: need >= 3 matched points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    const double ss_res = syy - slope * sxy;
    return LinearFit{my - slope * mx, slope, syy > 0.0 ? 1.0 - ss_res / syy : 1.0};
}

}  // namespace csbp
