#include "csbp/conditioned.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "csbp/closed_forms.hpp"
#include "csbp/parallel.hpp"

namespace csbp {

namespace {

double lerp(double t, double t0, double t1, double v0, double v1) {
    if (t1 <= t0) return v0;
    return v0 + (t - t0) / (t1 - t0) * (v1 - v0);
}

// Base-time path up to the horizon, landing on it exactly (the final step is
// shortened; increments are exact in law at any step size). Empty optional
// when killed first.
bool run_to_base_horizon(const StableParams& p, const StepPolicy& policy, double x0,
                         double horizon, PathRng& rng, bool negate, Path& out) {
    out.times.clear();
    out.values.clear();
    out.kill_index.reset();
    out.x0 = x0;
    out.times.push_back(0.0);
    out.values.push_back(x0);
    IncrementSampler sampler(p);
    double x = x0, s = 0.0;
    double dt_cached = policy.local_dt(p, x);
    double x_cached = x;
    const double sign = negate ? -1.0 : 1.0;
    while (horizon - s > 1e-12 * horizon) {
        if (std::abs(x - x_cached) > 0.25 * x_cached) {
            dt_cached = policy.local_dt(p, x);
            x_cached = x;
        }
        const double dt = std::min(dt_cached, horizon - s);
        x += sign * sampler.draw(rng, dt);
        if (!std::isfinite(x)) throw std::runtime_error("h_transform: non-finite value");
        s += dt;
        out.times.push_back(s);
        out.values.push_back(x);
        if (x <= policy.absorb_level) {
            out.kill_index = out.times.size() - 1;
            return false;
        }
    }
    return true;
}

// Clock-time path up to the clock horizon, final knot interpolated onto it.
bool run_to_clock_horizon(const StableParams& p, const StepPolicy& policy, double x0,
                          double horizon, PathRng& rng, Path& out) {
    out.times.clear();
    out.values.clear();
    out.kill_index.reset();
    out.x0 = x0;
    out.times.push_back(0.0);
    out.values.push_back(x0);
    CbStepper st(p, policy, x0, rng);
    while (st.step()) {
        if (st.clock() >= horizon) {
            out.times.push_back(horizon);
            out.values.push_back(
                lerp(horizon, st.clock_prev(), st.clock(), st.x_prev(), st.x()));
            return true;
        }
        out.times.push_back(st.clock());
        out.values.push_back(st.x());
    }
    if (st.kill_clock() >= horizon) {
        out.times.push_back(horizon);
        out.values.push_back(lerp(horizon, st.clock_prev(), st.kill_clock(), st.x_prev(), 0.0));
        return true;
    }
    out.times.push_back(st.kill_clock());
    out.values.push_back(0.0);
    out.kill_index = out.times.size() - 1;
    return false;
}

}  // namespace

HTransformEstimate h_transform_estimate(ConditionKind kind, const StableParams& p, double x,
                                        double horizon,
                                        const std::function<double(const Path&)>& functional,
                                        std::size_t n_paths, double dt, std::uint64_t seed,
                                        const StepPolicy* policy, double ess_floor) {
    if (!(x > 0.0) || !(horizon > 0.0))
        throw std::invalid_argument("h_transform_estimate: x and horizon must be positive");
    if (n_paths < 2) throw std::invalid_argument("h_transform_estimate: need n_paths >= 2");
    StepPolicy pol = policy ? *policy : StepPolicy{dt, 0.02, 0.0, 30};
    pol.dt = dt;

    const double h_exp = kind == ConditionKind::sn_dual ? p.alpha - 1.0 : 1.0;
    std::vector<double> contrib(n_paths, 0.0);
    std::vector<double> weights(n_paths, 0.0);
    std::vector<unsigned char> alive(n_paths, 0);

    parallel_for(n_paths, [&](std::size_t i) {
        PathRng rng(seed, i);
        Path path;
        bool ok;
        if (kind == ConditionKind::cb)
            ok = run_to_clock_horizon(p, pol, x, horizon, rng, path);
        else
            ok = run_to_base_horizon(p, pol, x, horizon, rng,
                                     kind == ConditionKind::sn_dual, path);
        if (!ok) return;
        const double w = std::pow(path.values.back() / x, h_exp);
        alive[i] = 1;
        weights[i] = w;
        contrib[i] = w * functional(path);
    });

    HTransformEstimate out;
    out.estimate = summarize(contrib, seed);
    out.ess = effective_sample_size(weights);
    out.n_alive = static_cast<std::size_t>(
        std::count(alive.begin(), alive.end(), static_cast<unsigned char>(1)));
    out.reliable = out.ess >= ess_floor;
    return out;
}

SurvivalConditionedResult survival_conditioned_laplace(const StableParams& p, double x, double t,
                                                       double lambda, std::size_t n_paths,
                                                       double dt, std::uint64_t seed,
                                                       const StepPolicy* policy) {
    if (!(x > 0.0) || !(t > 0.0) || !(lambda >= 0.0))
        throw std::invalid_argument("survival_conditioned_laplace: bad arguments");
    StepPolicy pol = policy ? *policy : StepPolicy{dt, 0.02, 0.0, 30};
    pol.dt = dt;
    const double ct = std::pow(p.c_plus * (p.alpha - 1.0) * t, 1.0 / (p.alpha - 1.0));

    std::vector<double> value(n_paths, 0.0);
    std::vector<unsigned char> accepted(n_paths, 0);
    parallel_for(n_paths, [&](std::size_t i) {
        PathRng rng(seed, i);
        const ClockMarginal m = sample_cb_marginal(p, pol, x, t, rng);
        if (!m.alive) return;
        accepted[i] = 1;
        value[i] = std::exp(-lambda * m.value / ct);
    });

    std::vector<double> kept;
    kept.reserve(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i)
        if (accepted[i]) kept.push_back(value[i]);
    if (kept.size() < 2)
        throw std::runtime_error(
            "survival_conditioned_laplace: no surviving paths; survival probability approximately " +
            std::to_string(1.0 - extinction_cdf(p, x, t)));

    SurvivalConditionedResult out;
    out.estimate = summarize(kept, seed);
    out.n_accepted = kept.size();
    out.acceptance_rate = static_cast<double>(kept.size()) / static_cast<double>(n_paths);
    return out;
}

SupLastPassageResult cbi_sup_before_last_passage(const StableParams& p, double y,
                                                 std::vector<double> z_values, double horizon,
                                                 std::size_t n_paths, double dt,
                                                 std::uint64_t seed, double x0, double window) {
    if (!(y > 0.0) || z_values.empty() || !(horizon > 0.0) || x0 < 0.0 || !(x0 < y))
        throw std::invalid_argument("cbi_sup_before_last_passage: bad arguments");
    if (!p.is_brownian())
        throw std::invalid_argument(
            "cbi_sup_before_last_passage: only the diffusion case alpha=2 is simulable here; "
            "the weighted small-x proxy has acceptance rate ~x0/horizon-scale, which vanishes "
            "at the horizon the last-passage observability rule requires");
    std::sort(z_values.begin(), z_values.end());

    // The conditioned process solves dY = 2 c_plus dt + sqrt(2 c_plus Y) dW
    // from 0 (branching diffusion plus unit-drift immigration); paths are
    // unweighted. Running suprema at visits to [0,y] are tracked streaming,
    // so the sup before the last visit needs no stored path.
    const double eta = 0.02;
    const double window_start = (1.0 - window) * horizon;
    const double two_c = 2.0 * p.c_plus;

    std::vector<double> sup_before(n_paths, 0.0);
    std::vector<unsigned char> observed(n_paths, 0);
    parallel_for(n_paths, [&](std::size_t i) {
        PathRng rng(seed, i);
        double t = 0.0, value = x0;
        double running_sup = value;
        double sup_at_last_below = value;
        double t_last_below = 0.0;
        while (horizon - t > 1e-12 * horizon) {
            // the increment scale tracks eta*value but tightens in a band
            // around the passage level y, where a missed sub-knot dip would
            // move the detected last passage; the step solves
            // sqrt(2 c Y step) = sigma
            const double sigma =
                eta * std::min(value + 1e-3 * y, std::max(std::abs(value - y), 0.3 * y));
            const double step = std::min(
                std::max(sigma * sigma / (two_c * std::max(value, 1e-3 * y)), dt * 0x1p-20),
                horizon - t);
            value += two_c * step +
                     std::sqrt(two_c * std::max(value, 0.0) * step) * rng.gaussian();
            if (value < 0.0) value = 0.0;  // never absorbing; clip the Euler overshoot
            t += step;
            running_sup = std::max(running_sup, value);
            if (value <= y) {
                sup_at_last_below = running_sup;
                t_last_below = t;
            }
        }
        if (t_last_below <= window_start) {
            observed[i] = 1;
            sup_before[i] = sup_at_last_below;
        }
    });

    SupLastPassageResult out;
    out.z_values = z_values;
    std::size_t n_obs = 0;
    for (std::size_t i = 0; i < n_paths; ++i) n_obs += observed[i];
    out.observed_fraction = static_cast<double>(n_obs) / static_cast<double>(n_paths);
    out.ess = static_cast<double>(n_obs);
    if (n_obs < 3) throw std::runtime_error("cbi_sup_before_last_passage: no observable paths");

    out.probabilities.resize(z_values.size(), 0.0);
    for (std::size_t zi = 0; zi < z_values.size(); ++zi) {
        std::size_t acc = 0;
        for (std::size_t i = 0; i < n_paths; ++i)
            if (observed[i] && sup_before[i] <= z_values[zi]) ++acc;
        out.probabilities[zi] = static_cast<double>(acc) / static_cast<double>(n_obs);
    }

    std::vector<double> xs(z_values.size());
    for (std::size_t zi = 0; zi < z_values.size(); ++zi) xs[zi] = y / z_values[zi];
    const LinearFit fit = least_squares(xs, out.probabilities);
    out.intercept = fit.intercept;
    out.kappa = -fit.slope;
    out.r_squared = fit.r_squared;
    return out;
}

}  // namespace csbp
