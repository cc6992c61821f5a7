#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace csbp {

/// Monte Carlo point estimate with its standard error.
struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;  // sample std / sqrt(n); serialized as "stderr"
    std::size_t n = 0;
    std::uint64_t seed = 0;
};

/// Fixed-order pairwise summation; the reduction result does not depend on
/// how the values were produced across workers.
double pairwise_sum(std::span<const double> values);

/// Mean and standard error via pairwise reduction; requires n >= 2.
MCEstimate summarize(std::span<const double> values, std::uint64_t seed);

struct KSResult {
    double statistic;
    double p_value;
};

/// Asymptotic Kolmogorov complementary CDF Q(lambda) = 2 sum (-1)^{k-1} e^{-2 k^2 lambda^2}.
double kolmogorov_q(double lambda);

/// p-value of a KS statistic at effective sample size n (small-sample corrected).
double ks_p_value(double statistic, double n_effective);

/// One-sample KS against a supplied CDF; at least 50 samples required.
KSResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

/// One-sample KS where samples above the censor point were recorded as
/// +infinity. The statistic is exact below the censor point; above it the
/// deviation is bounded by max(censored fraction, 1 - cdf(censor)), which is
/// folded into the reported statistic.
KSResult ks_test_censored(std::vector<double> samples, const std::function<double(double)>& cdf,
                          double censor_point);

/// Two-sample KS (symmetric in its arguments).
KSResult ks_test_two_sample(std::vector<double> a, std::vector<double> b);

/// Effective sample size (sum w)^2 / sum w^2 of a weight vector.
double effective_sample_size(std::span<const double> weights);

/// Deterministic systematic resampling: draws `m` indices proportional to the
/// weights using a single uniform offset derived from `seed`.
std::vector<std::size_t> systematic_resample(std::span<const double> weights, std::size_t m,
                                             std::uint64_t seed);

struct LinearFit {
    double intercept;
    double slope;
    double r_squared;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace csbp
