#include "csbp/stable.hpp"

#include <cmath>
#include <stdexcept>

namespace csbp {

double psi(const StableParams& p, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("psi: lambda must be nonnegative");
    return p.c_plus * std::pow(lambda, p.alpha);
}

double phi_inverse(const StableParams& p, double q) {
    if (q < 0.0) throw std::invalid_argument("phi_inverse: q must be nonnegative");
    return std::pow(q / p.c_plus, 1.0 / p.alpha);
}

RegimeReport classify_regime(const StableParams&) {
    // psi'(0+) = 0 for c_plus*lambda^alpha with alpha > 1
    return RegimeReport{Regime::oscillates, 0.0};
}

IncrementSampler::IncrementSampler(const StableParams& p) : params_(p) {
    // beta = +1 (no negative jumps). For alpha in (1,2), tan(pi*alpha/2) < 0
    // and the principal arctan branch gives B = pi/2 - pi/alpha.
    cms_b_ = M_PI_2 - M_PI / p.alpha;
    inv_alpha_ = 1.0 / p.alpha;
    skew_exp_ = (1.0 - p.alpha) / p.alpha;
}

double IncrementSampler::draw(PathRng& rng, double dt) const {
    if (!(dt > 0.0)) throw std::invalid_argument("sample_increment: dt must be positive");
    if (params_.is_brownian())
        return std::sqrt(2.0 * params_.c_plus * dt) * rng.gaussian();

    const double a = params_.alpha;
    const double u = M_PI * (rng.uniform() - 0.5);
    const double w = rng.exponential();
    const double au_b = a * (u + cms_b_);
    // The S&T unit scale sigma = |cos(pi a/2)|^{1/a} cancels against the CMS
    // S_{a,1} factor; what remains is multiplied by (c_plus*dt)^{1/a}.
    const double z = std::sin(au_b) / std::pow(std::cos(u), inv_alpha_) *
                     std::pow(std::cos(u - au_b) / w, skew_exp_);
    return std::pow(params_.c_plus * dt, inv_alpha_) * z;
}

Path simulate_path(const StableParams& p, double x0, double horizon, double dt, PathRng& rng) {
    if (!(dt > 0.0) || !(horizon >= dt))
        throw std::invalid_argument("simulate_path: need horizon >= dt > 0");
    IncrementSampler sampler(p);
    const auto n_steps = static_cast<std::size_t>(std::floor(horizon / dt + 1e-9));

    Path path;
    path.x0 = x0;
    path.times.reserve(n_steps + 1);
    path.values.reserve(n_steps + 1);
    path.times.push_back(0.0);
    path.values.push_back(x0);
    double x = x0;
    for (std::size_t k = 1; k <= n_steps; ++k) {
        x += sampler.draw(rng, dt);
        if (!std::isfinite(x)) throw std::runtime_error("simulate_path: non-finite value");
        path.times.push_back(static_cast<double>(k) * dt);
        path.values.push_back(x);
    }
    return path;
}

std::optional<std::pair<std::size_t, double>> first_passage(const Path& path, double level,
                                                            CrossDirection direction) {
    path.validate();
    const std::size_t last = path.last_index();
    for (std::size_t i = 0; i <= last; ++i) {
        const double v = path.values[i];
        if ((direction == CrossDirection::below && v <= level) ||
            (direction == CrossDirection::above && v >= level))
            return std::make_pair(i, path.times[i]);
    }
    return std::nullopt;
}

Path dual_path(const Path& path) {
    Path out = path;
    out.x0 = -out.x0;
    for (auto& v : out.values) v = -v;
    return out;
}

bool kill_at_first_crossing(Path& path, double level) {
    auto hit = first_passage(path, level, CrossDirection::below);
    if (!hit) return false;
    path.kill_index = hit->first;
    return true;
}

}  // namespace csbp
