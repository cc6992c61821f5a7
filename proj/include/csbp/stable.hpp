#pragma once

#include <optional>
#include <utility>

#include "csbp/path.hpp"
#include "csbp/rng.hpp"

namespace csbp {

/// Model parameters of the spectrally positive stable Laplace exponent
/// psi(lambda) = c_plus * lambda^alpha, alpha in (1,2], c_plus > 0.
/// alpha = 2 is Brownian motion; its conventional scale is c_plus = 1/2.
struct StableParams {
    double alpha;
    double c_plus;

    explicit StableParams(double alpha_, std::optional<double> c_plus_ = std::nullopt)
        : alpha(alpha_), c_plus(c_plus_.value_or(alpha_ == 2.0 ? 0.5 : 1.0)) {
        if (!(alpha > 1.0) || !(alpha <= 2.0))
            throw std::invalid_argument("StableParams: alpha must lie in (1,2]");
        if (!(c_plus > 0.0))
            throw std::invalid_argument("StableParams: c_plus must be positive");
    }

    bool is_brownian() const { return alpha == 2.0; }
};

enum class Regime { drifts_up, oscillates, drifts_down };

struct RegimeReport {
    Regime regime;
    double phi_zero;  // largest root of psi
};

double psi(const StableParams& p, double lambda);

/// Right inverse of psi: the unique nonnegative root of psi(x) = q.
double phi_inverse(const StableParams& p, double q);

/// For a pure power exponent with alpha > 1, psi'(0+) = 0 always, so the
/// process oscillates. Kept as an operation so a future non-stable exponent
/// can slot into the same trichotomy.
RegimeReport classify_regime(const StableParams& p);

/// One-step increment sampler: draws X_dt - X_0 with Laplace transform
/// exp(dt * psi(lambda)). Brownian case is an exact Gaussian of variance
/// 2*c_plus*dt; otherwise a Chambers-Mallows-Stuck totally skewed stable
/// draw scaled by (c_plus*dt)^{1/alpha}. The scale/skewness convention is
/// pinned down by the Monte Carlo Laplace-transform test, not by the formula
/// alone.
class IncrementSampler {
public:
    explicit IncrementSampler(const StableParams& p);

    double draw(PathRng& rng, double dt) const;

    const StableParams& params() const { return params_; }

private:
    StableParams params_;
    double cms_b_;       // arctan(tan(pi*alpha/2))/alpha for beta = +1
    double inv_alpha_;
    double skew_exp_;    // (1-alpha)/alpha
};

/// Plain Euler grid path: times k*dt up to the horizon, no killing applied.
Path simulate_path(const StableParams& p, double x0, double horizon, double dt, PathRng& rng);

enum class CrossDirection { below, above };

/// First grid index whose value crosses the level (closed inequality:
/// <= for below, >= for above), scanning values[0..kill_index].
std::optional<std::pair<std::size_t, double>> first_passage(const Path& path, double level,
                                                            CrossDirection direction);

/// Pointwise negation (the dual process); kill information preserved.
Path dual_path(const Path& path);

/// Marks the path killed at its first grid crossing of `level` from above
/// (closed inequality), if any. Returns true if a kill was applied.
bool kill_at_first_crossing(Path& path, double level = 0.0);

}  // namespace csbp
