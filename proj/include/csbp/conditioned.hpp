#pragma once

#include <functional>
#include <vector>

#include "csbp/lamperti.hpp"
#include "csbp/stats.hpp"

namespace csbp {

/// Which conditioned process the weighting targets:
///  - sp_positive: the spectrally positive path conditioned to stay positive,
///    h(x) = x, weighted at a fixed base-time horizon;
///  - sn_dual: the dual (spectrally negative) path conditioned to stay
///    positive, h(x) = W(x) proportional to x^{alpha-1};
///  - cb: the branching process conditioned on non-extinction, h(x) = x,
///    weighted at a fixed clock horizon.
enum class ConditionKind { sp_positive, sn_dual, cb };

/// One path's contribution to a weighted estimate. weight is zero whenever
/// the path did not survive to the horizon.
struct WeightedSample {
    double functional_value = 0.0;
    double weight = 0.0;
    bool alive = false;
};

struct HTransformEstimate {
    MCEstimate estimate;  // mean of functional*weight over all paths
    double ess = 0.0;     // (sum w)^2 / sum w^2
    std::size_t n_alive = 0;
    bool reliable = true;  // ess above the configured floor
};

/// Weighted estimator of the conditioned expectation E^up[F]:
/// mean of F(path) * h(end value)/h(start) over paths surviving to the
/// horizon. The functional sees the path up to the horizon: for kinds
/// sp_positive/sn_dual times are base times; for kind cb times are clock
/// times and the final knot sits exactly at the horizon. Constants in h
/// cancel in the ratio, so none is chosen.
HTransformEstimate h_transform_estimate(ConditionKind kind, const StableParams& p, double x,
                                        double horizon,
                                        const std::function<double(const Path&)>& functional,
                                        std::size_t n_paths, double dt, std::uint64_t seed,
                                        const StepPolicy* policy = nullptr,
                                        double ess_floor = 100.0);

struct SurvivalConditionedResult {
    MCEstimate estimate;      // over accepted paths
    double acceptance_rate;   // survival probability estimate
    std::size_t n_accepted;
};

/// Rejection estimator of E_x[e^{-lambda Y_t / c_t} | alive at t] with
/// c_t = [c_plus(alpha-1) t]^{1/(alpha-1)}. Fails loudly when nothing is
/// accepted.
SurvivalConditionedResult survival_conditioned_laplace(const StableParams& p, double x, double t,
                                                       double lambda, std::size_t n_paths,
                                                       double dt, std::uint64_t seed,
                                                       const StepPolicy* policy = nullptr);

struct SupLastPassageResult {
    std::vector<double> z_values;
    std::vector<double> probabilities;  // weighted estimates of P(sup <= z)
    double intercept = 0.0;             // fit of prob = intercept - kappa*(y/z)
    double kappa = 0.0;
    double r_squared = 0.0;
    double observed_fraction = 0.0;  // paths whose last passage was observable
    double ess = 0.0;
};

/// Estimates P^up(sup before the last passage below y <= z) over a z grid,
/// started from a small-x proxy of the entrance law, and fits the
/// 1 - kappa*(y/z) shape. The last passage is declared observed when the path
/// stays above y over the final `window` fraction of the horizon.
SupLastPassageResult cbi_sup_before_last_passage(const StableParams& p, double y,
                                                 std::vector<double> z_values, double horizon,
                                                 std::size_t n_paths, double dt,
                                                 std::uint64_t seed, double x0 = 1e-3,
                                                 double window = 0.2);

}  // namespace csbp
