#include "csbp/lamperti.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace csbp {

namespace {

// index of the last knot with grid[i] <= t among grid[0..n), grid increasing
std::size_t left_knot(const double* grid, std::size_t n, double t) {
    const double* it = std::upper_bound(grid, grid + n, t);
    if (it == grid) throw std::invalid_argument("time before grid start");
    return static_cast<std::size_t>(it - grid) - 1;
}

double lerp(double t, double t0, double t1, double v0, double v1) {
    if (t1 <= t0) return v0;
    const double w = (t - t0) / (t1 - t0);
    return v0 + w * (v1 - v0);
}

}  // namespace

TimeChangedPath cb_time_change(const Path& base, double dt_out) {
    base.validate();
    if (!(base.x0 > 0.0)) throw std::invalid_argument("cb_time_change: x0 must be positive");
    if (!(dt_out > 0.0)) throw std::invalid_argument("cb_time_change: dt_out must be positive");

    TimeChangedPath tc;
    tc.base = base;
    const std::size_t last = base.last_index();
    const std::size_t n_pos = base.kill_index ? *base.kill_index : last + 1;
    for (std::size_t i = 0; i < n_pos; ++i)
        if (!(base.values[i] > 0.0))
            throw std::invalid_argument("cb_time_change: nonpositive value before the kill index");

    tc.clock_values.resize(base.size(), 0.0);
    double a = 0.0;
    for (std::size_t i = 1; i < n_pos; ++i) {
        const double dt = base.times[i] - base.times[i - 1];
        a += dt * 0.5 * (1.0 / base.values[i - 1] + 1.0 / base.values[i]);
        tc.clock_values[i] = a;
    }

    double clock_end = a;
    if (base.kill_index) {
        // interpolate the crossing; the final clock sliver uses the left value
        const std::size_t k = *base.kill_index;
        if (k == 0) throw std::invalid_argument("cb_time_change: killed at the initial knot");
        const double x0v = base.values[k - 1], x1v = base.values[k];
        const double frac = x1v >= 0.0 ? 1.0 : x0v / (x0v - x1v);
        const double dt = base.times[k] - base.times[k - 1];
        clock_end = a + frac * dt / x0v;
        tc.clock_values[k] = clock_end;
        tc.absorbed = true;
        tc.absorption_time = clock_end;
    }

    const double* cg = tc.clock_values.data();
    auto value_at_clock = [&](double t) {
        const std::size_t i = left_knot(cg, n_pos, t);
        if (i + 1 < n_pos)
            return lerp(t, cg[i], cg[i + 1], base.values[i], base.values[i + 1]);
        return lerp(t, cg[i], clock_end, base.values[i], 0.0);  // slide toward the crossing
    };

    tc.output.x0 = base.x0;
    const auto n_out = static_cast<std::size_t>(std::floor(clock_end / dt_out * (1.0 + 1e-12)));
    tc.output.times.reserve(n_out + 2);
    tc.output.values.reserve(n_out + 2);
    for (std::size_t j = 0; j <= n_out; ++j) {
        const double t = static_cast<double>(j) * dt_out;
        if (t > clock_end) break;
        tc.output.times.push_back(t);
        tc.output.values.push_back(j == 0 ? base.x0 : value_at_clock(t));
    }
    if (tc.absorbed && tc.output.times.back() < clock_end) {
        tc.output.times.push_back(clock_end);
        tc.output.values.push_back(0.0);
        tc.output.kill_index = tc.output.times.size() - 1;
    }
    return tc;
}

TimeChangedPath pssmp_from_levy(const Path& xi_path, double x, double index, double dt_out) {
    xi_path.validate();
    if (!(x > 0.0) || !(index > 0.0))
        throw std::invalid_argument("pssmp_from_levy: x and index must be positive");
    if (!(dt_out > 0.0)) throw std::invalid_argument("pssmp_from_levy: dt_out must be positive");

    TimeChangedPath tc;
    tc.base = xi_path;
    const std::size_t n = xi_path.last_index() + 1;
    tc.clock_values.resize(xi_path.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double du = xi_path.times[i] - xi_path.times[i - 1];
        acc += du * 0.5 * (std::exp(index * xi_path.values[i - 1]) +
                           std::exp(index * xi_path.values[i]));
        tc.clock_values[i] = acc;
    }

    const double t_end = std::pow(x, index) * acc;
    const double scale = std::pow(x, -index);
    const double* cg = tc.clock_values.data();
    tc.output.x0 = x * std::exp(xi_path.values[0]);
    const auto n_out = static_cast<std::size_t>(std::floor(t_end / dt_out * (1.0 + 1e-12)));
    for (std::size_t j = 0; j <= n_out; ++j) {
        const double t = static_cast<double>(j) * dt_out;
        if (t > t_end) break;
        const double target = std::min(t * scale, acc);
        const std::size_t i = left_knot(cg, n, target);
        const double xi_val =
            i + 1 < n ? lerp(target, cg[i], cg[i + 1], xi_path.values[i], xi_path.values[i + 1])
                      : xi_path.values[i];
        tc.output.times.push_back(t);
        tc.output.values.push_back(x * std::exp(xi_val));
    }
    return tc;
}

Path levy_from_pssmp(const Path& y_path, double index) {
    y_path.validate();
    if (!(index > 0.0)) throw std::invalid_argument("levy_from_pssmp: index must be positive");
    const double x0 = y_path.values[0];
    if (!(x0 > 0.0)) throw std::invalid_argument("levy_from_pssmp: start must be positive");

    std::size_t n = y_path.last_index() + 1;
    // an absorbed path may end with a zero knot; the transform diverges there
    while (n > 1 && !(y_path.values[n - 1] > 0.0)) --n;

    Path xi;
    xi.x0 = 0.0;
    xi.times.reserve(n);
    xi.values.reserve(n);
    double u = 0.0;
    xi.times.push_back(0.0);
    xi.values.push_back(0.0);
    for (std::size_t i = 1; i < n; ++i) {
        if (!(y_path.values[i] > 0.0))
            throw std::invalid_argument("levy_from_pssmp: nonpositive values");
        const double dt = y_path.times[i] - y_path.times[i - 1];
        u += dt * 0.5 * (std::pow(y_path.values[i - 1], -index) +
                         std::pow(y_path.values[i], -index));
        xi.times.push_back(u);
        xi.values.push_back(std::log(y_path.values[i] / x0));
    }
    return xi;
}

Path reverse_path(const TimeChangedPath& path, double dt_out) {
    if (!path.absorbed) throw std::invalid_argument("reverse_path: input is not absorbed");
    const double T = path.absorption_time;
    if (dt_out <= 0.0) {
        dt_out = path.output.times.size() >= 2 ? path.output.times[1] - path.output.times[0]
                                               : T / 128.0;
    }
    const std::size_t n_pos =
        path.base.kill_index ? *path.base.kill_index : path.base.size();
    const double* cg = path.clock_values.data();

    Path rev;
    rev.x0 = 0.0;
    const auto n_out = static_cast<std::size_t>(std::floor(T / dt_out * (1.0 + 1e-12)));
    for (std::size_t j = 0; j <= n_out; ++j) {
        const double t = static_cast<double>(j) * dt_out;
        if (t > T) break;
        double v;
        if (j == 0) {
            v = 0.0;  // left limit at the absorption time
        } else {
            const std::size_t i = left_knot(cg, n_pos, std::max(0.0, T - t));
            v = path.base.values[i];
        }
        rev.times.push_back(t);
        rev.values.push_back(v);
    }
    return rev;
}

double StepPolicy::local_dt(const StableParams& p, double x) const {
    const double g = p.is_brownian() ? 2.0 * p.c_plus : p.c_plus;
    const double rel = std::pow(eta * x, p.alpha) / g;
    const double lo = std::ldexp(dt, -floor_levels);
    const double hi = dt_max > 0.0 ? dt_max : dt;
    return std::min(hi, std::max(lo, rel));
}

CbStepper::CbStepper(const StableParams& p, const StepPolicy& policy, double x0, PathRng& rng,
                     bool negate_increments)
    : sampler_(p),
      policy_(policy),
      rng_(&rng),
      sign_(negate_increments ? -1.0 : 1.0),
      x_(x0),
      x_prev_(x0),
      s_(0.0),
      s_prev_(0.0),
      a_(0.0),
      a_prev_(0.0),
      killed_(false),
      kill_s_(0.0),
      kill_clock_(0.0) {
    if (!(x0 > 0.0)) throw std::invalid_argument("CbStepper: x0 must be positive");
    dt_cached_ = policy_.local_dt(sampler_.params(), x0);
    x_cached_ = x0;
}

bool CbStepper::step() {
    if (killed_) throw std::logic_error("CbStepper: stepped after absorption");
    // pow() in local_dt is costly; refresh the cached step only once X has
    // drifted by more than 25%, which keeps the step scale within target.
    if (std::abs(x_ - x_cached_) > 0.25 * x_cached_) {
        dt_cached_ = policy_.local_dt(sampler_.params(), x_);
        x_cached_ = x_;
    }
    const double dt = dt_cached_;
    const double xn = x_ + sign_ * sampler_.draw(*rng_, dt);
    if (!std::isfinite(xn)) throw std::runtime_error("CbStepper: non-finite value");

    x_prev_ = x_;
    s_prev_ = s_;
    a_prev_ = a_;
    if (xn <= 0.0) {
        const double frac = x_ / (x_ - xn);
        kill_s_ = s_ + frac * dt;
        kill_clock_ = a_ + frac * dt / x_;
        killed_ = true;
        s_ = kill_s_;
        a_ = kill_clock_;
        x_ = 0.0;
        return false;
    }
    a_ += dt * 0.5 * (1.0 / x_ + 1.0 / xn);
    s_ += dt;
    if (xn <= policy_.absorb_level) {
        kill_s_ = s_;
        kill_clock_ = a_;
        killed_ = true;
        x_ = xn;
        return false;
    }
    x_ = xn;
    return true;
}

double sample_extinction_time(const StableParams& p, const StepPolicy& policy, double x0,
                              double clock_cap, PathRng& rng) {
    CbStepper st(p, policy, x0, rng);
    while (st.step()) {
        if (st.clock() >= clock_cap) return std::numeric_limits<double>::infinity();
    }
    return st.kill_clock();
}

ClockMarginal sample_cb_marginal(const StableParams& p, const StepPolicy& policy, double x0,
                                 double t, PathRng& rng) {
    if (t == 0.0) return {x0, true};
    CbStepper st(p, policy, x0, rng);
    while (st.step()) {
        if (st.clock() >= t) {
            const double v = lerp(t, st.clock_prev(), st.clock(), st.x_prev(), st.x());
            return {v, true};
        }
    }
    if (st.kill_clock() >= t) {
        // absorbed within the final step but after clock time t
        const double v = lerp(t, st.clock_prev(), st.kill_clock(), st.x_prev(), 0.0);
        return {v, true};
    }
    return {0.0, false};
}

double RawCbPath::value_at_clock_left(double t) const {
    return values[left_knot(clock.data(), clock.size(), t)];
}

double RawCbPath::value_at_clock(double t) const {
    const std::size_t i = left_knot(clock.data(), clock.size(), t);
    if (i + 1 < clock.size()) return lerp(t, clock[i], clock[i + 1], values[i], values[i + 1]);
    if (killed) return lerp(t, clock[i], kill_clock, values[i], 0.0);
    return values[i];
}

RawCbPath record_cb_path(const StableParams& p, const StepPolicy& policy, double x0,
                         double clock_cap, PathRng& rng, bool negate_increments) {
    RawCbPath out;
    out.times.push_back(0.0);
    out.clock.push_back(0.0);
    out.values.push_back(x0);
    CbStepper st(p, policy, x0, rng, negate_increments);
    while (st.step()) {
        out.times.push_back(st.time());
        out.clock.push_back(st.clock());
        out.values.push_back(st.x());
        if (st.clock() >= clock_cap) return out;
    }
    out.killed = true;
    out.kill_time = st.kill_time();
    out.kill_clock = st.kill_clock();
    return out;
}

}  // namespace csbp
