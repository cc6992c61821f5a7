#pragma once

#include <vector>

#include "csbp/path.hpp"
#include "csbp/rng.hpp"
#include "csbp/stable.hpp"

namespace csbp {

/// A path together with its additive clock and the transformed trajectory.
struct TimeChangedPath {
    Path base;
    std::vector<double> clock_values;  // cumulative clock on the base grid
    Path output;
    bool absorbed = false;
    double absorption_time = 0.0;  // on the output time scale, valid when absorbed
};

/// Branching time change of a killed spectrally positive path: clock
/// A_t = int_0^t ds/X_s accumulated by the trapezoid rule, output
/// Y_t = X_{theta(t)} on a uniform grid of spacing dt_out, absorbed at
/// A evaluated at the (linearly interpolated) zero crossing. The base must be
/// pre-killed at its first grid crossing of zero; strictly positive values are
/// required before the kill index.
TimeChangedPath cb_time_change(const Path& base, double dt_out);

/// Exponential space change driven by a Levy path:
/// X_t = x * exp(xi at zeta(t x^{-index})) with zeta the inverse of the
/// accumulated exponential functional int_0^s exp(index * xi_u) du.
/// Output covers [0, x^index * I_end) on a uniform dt_out grid.
TimeChangedPath pssmp_from_levy(const Path& xi_path, double x, double index, double dt_out);

/// Inverse of pssmp_from_levy: recovers the driving Levy path
/// xi_u = log(Y_t / x0) at u = int_0^t Y_s^{-index} ds, on the (nonuniform)
/// image of the input grid. Values must be strictly positive.
Path levy_from_pssmp(const Path& y_path, double index);

/// Time reversal about the absorption time: values are read at clock time
/// (T - t) as left limits on the grid (value at the preceding knot); the
/// output starts at 0 and runs back toward the starting level. Requires an
/// absorbed input.
Path reverse_path(const TimeChangedPath& path, double dt_out = 0.0);

/// Step-size policy for the adaptive path engine. The local step keeps the
/// increment scale near eta*X (dt_loc = (eta X)^alpha / c, clamped), which
/// refines the grid near the absorbing boundary and, when dt_max allows,
/// lengthens steps where X is large. Levy increments are exact in law at any
/// step size, so variable dt changes only passage detection and clock
/// quadrature accuracy, both of which this rule keeps at uniform relative
/// resolution.
struct StepPolicy {
    double dt = 1e-3;      // base step and default upper clamp
    double eta = 0.02;     // target relative increment scale
    double dt_max = 0.0;   // 0: never exceed dt; otherwise the upper clamp
    int floor_levels = 30; // lower clamp dt * 2^-floor_levels
    // Paths are absorbed once they reach this level. Zero is exact extinction;
    // a positive level is an explicit early-absorption approximation whose
    // bias the caller must budget (used where the outcome below the level is
    // already decided).
    double absorb_level = 0.0;

    double local_dt(const StableParams& p, double x) const;
};

/// Streaming simulator of a spectrally positive stable path with its
/// branching clock; absorbs at the first step crossing zero, with the
/// crossing time interpolated and the final clock sliver taken at the
/// left endpoint value (1/X is not evaluated at the clamped zero).
class CbStepper {
public:
    CbStepper(const StableParams& p, const StepPolicy& policy, double x0, PathRng& rng,
              bool negate_increments = false);

    /// One step. Returns false exactly once, on the absorbing step.
    bool step();

    bool killed() const { return killed_; }
    double x() const { return x_; }
    double x_prev() const { return x_prev_; }
    double time() const { return s_; }
    double time_prev() const { return s_prev_; }
    double clock() const { return a_; }
    double clock_prev() const { return a_prev_; }
    // valid after the absorbing step
    double kill_time() const { return kill_s_; }
    double kill_clock() const { return kill_clock_; }

private:
    IncrementSampler sampler_;
    StepPolicy policy_;
    PathRng* rng_;
    double sign_;
    double x_, x_prev_;
    double s_, s_prev_;
    double a_, a_prev_;
    bool killed_;
    double kill_s_, kill_clock_;
    double dt_cached_, x_cached_;
};

/// Extinction time of the branching process started at x0 (clock value at
/// absorption), censored at clock_cap; censored paths report +infinity.
double sample_extinction_time(const StableParams& p, const StepPolicy& policy, double x0,
                              double clock_cap, PathRng& rng);

struct ClockMarginal {
    double value;  // 0 when absorbed before t
    bool alive;
};

/// Value of the time-changed process at clock time t (linear interpolation
/// across the straddling step).
ClockMarginal sample_cb_marginal(const StableParams& p, const StepPolicy& policy, double x0,
                                 double t, PathRng& rng);

/// Full knot record of a branching path run to absorption or to clock_cap.
struct RawCbPath {
    std::vector<double> times;   // base time
    std::vector<double> clock;   // branching clock
    std::vector<double> values;  // path values (strictly positive)
    bool killed = false;
    double kill_time = 0.0;
    double kill_clock = 0.0;  // extinction time on the clock scale

    /// Value at clock time t by left-knot lookup (cadlag left limit).
    double value_at_clock_left(double t) const;
    /// Value at clock time t by linear interpolation.
    double value_at_clock(double t) const;
};

RawCbPath record_cb_path(const StableParams& p, const StepPolicy& policy, double x0,
                         double clock_cap, PathRng& rng, bool negate_increments = false);

}  // namespace csbp
