#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "csbp/closed_forms.hpp"
#include "csbp/conditioned.hpp"
#include "csbp/lamperti.hpp"
#include "csbp/parallel.hpp"
#include "csbp/stable.hpp"
#include "csbp/verify.hpp"

namespace {

using namespace csbp;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
}

StableParams make_params(double alpha, double c_plus) {
    if (c_plus > 0.0) return StableParams(alpha, c_plus);
    return StableParams(alpha);
}

// ------------------------------------------------------------------ simulate

struct SimulateOpts {
    std::string process = "cb";
    double alpha = 1.5;
    double c_plus = -1.0;  // <=0: model default
    double x0 = 1.0;
    double dt = 1e-3;
    double horizon = 1.0;
    std::size_t paths = 10;
    std::uint64_t seed = 1;
    double eta = 0.02;
    std::string out;
};

void write_path_rows(std::ostream& os, std::size_t id, const std::vector<double>& t,
                     const std::vector<double>& v, bool absorbed) {
    for (std::size_t k = 0; k < t.size(); ++k) {
        const bool last = k + 1 == t.size();
        os << id << ',' << fmt(t[k]) << ',' << fmt(v[k]) << ',' << (absorbed && last ? 1 : 0)
           << '\n';
    }
}

int cmd_simulate(const SimulateOpts& opt) {
    const StableParams p = make_params(opt.alpha, opt.c_plus);
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!opt.out.empty()) {
        file.open(opt.out);
        if (!file) {
            std::cerr << "simulate: cannot open output file " << opt.out << "\n";
            return 1;
        }
        os = &file;
    }
    *os << "path_id,t,value,absorbed\n";

    const StepPolicy pol{opt.dt, opt.eta, 0.0, 30};
    for (std::size_t i = 0; i < opt.paths; ++i) {
        PathRng rng(opt.seed, i);
        if (opt.process == "stable") {
            const Path path = simulate_path(p, opt.x0, opt.horizon, opt.dt, rng);
            write_path_rows(*os, i, path.times, path.values, false);
        } else if (opt.process == "cb") {
            const RawCbPath raw = record_cb_path(p, pol, opt.x0, opt.horizon, rng);
            std::vector<double> t = raw.clock, v = raw.values;
            if (raw.killed) {
                t.push_back(raw.kill_clock);
                v.push_back(0.0);
            }
            write_path_rows(*os, i, t, v, raw.killed);
        } else {
            // importance-resampled conditioned processes: draw a batch of
            // weighted paths, keep paths in proportion to their weights
            const bool dual = opt.process == "dual-conditioned";
            const std::size_t batch = std::max<std::size_t>(opt.paths * 8, 64);
            std::vector<RawCbPath> raws(batch);
            std::vector<double> weights(batch, 0.0);
            const double h_exp = dual ? p.alpha - 1.0 : 1.0;
            parallel_for(batch, [&](std::size_t j) {
                PathRng prng(opt.seed, j);
                raws[j] = record_cb_path(p, pol, opt.x0, opt.horizon, prng, dual);
                if (!raws[j].killed)
                    weights[j] = std::pow(raws[j].values.back() / opt.x0, h_exp);
            });
            const auto picks = systematic_resample(weights, opt.paths, opt.seed ^ 0x51EDULL);
            for (std::size_t k = 0; k < picks.size(); ++k)
                write_path_rows(*os, k, raws[picks[k]].clock, raws[picks[k]].values, false);
        }
    }
    return 0;
}

// ---------------------------------------------------------------------- eval

struct EvalOpts {
    std::string formula;
    double alpha = 1.5;
    double c_plus = -1.0;
    std::vector<double> t{1.0};
    std::vector<double> lambda{1.0};
    std::vector<double> x{1.0};
    double q = 0.0;
    double a = 2.0;
    double y = 1.0;
    double z = 0.5;
    double u = -1.0;
    double v = -2.0;
    double m_star = 1.0;
    std::string branch = "up";
};

int cmd_eval(const EvalOpts& opt) {
    const StableParams p = make_params(opt.alpha, opt.c_plus);
    using Fn = std::function<double(double t, double lam, double x)>;
    const std::map<std::string, Fn> formulas = {
        {"psi", [&](double, double lam, double) { return psi(p, lam); }},
        {"phi_inverse", [&](double, double lam, double) { return phi_inverse(p, lam); }},
        {"u_t", [&](double t, double lam, double) { return u_t(p, t, lam); }},
        {"cb_laplace", [&](double t, double lam, double x) { return cb_laplace(p, x, t, lam); }},
        {"extinction_cdf", [&](double t, double, double x) { return extinction_cdf(p, x, t); }},
        {"frechet_density", [&](double, double, double x) { return frechet_density(p, x); }},
        {"cbi_entrance_laplace",
         [&](double t, double lam, double) { return cbi_entrance_laplace(p, t, lam); }},
        {"cbi_exact_laplace",
         [&](double t, double lam, double x) { return cbi_exact_laplace(p, x, t, lam); }},
        {"qs_limit", [&](double, double lam, double) { return qs_limit(p, lam); }},
        {"cbi_qs_limit", [&](double, double lam, double) { return cbi_qs_limit(p, lam); }},
        {"scale_W", [&](double, double, double x) { return scale_W(p, opt.q, x); }},
        {"scale_Z", [&](double, double, double x) { return scale_Z(p, opt.q, x); }},
        {"mittag_leffler",
         [&](double, double, double x) { return mittag_leffler(p.alpha, x).value; }},
        {"infimum_cor1",
         [&](double, double, double) {
             return cb_infimum_before_last_passage(p.alpha, opt.y, opt.z);
         }},
        {"infimum_prop3",
         [&](double, double, double) {
             return levy_infimum_before_last_passage(p.alpha, opt.u, opt.v);
         }},
        {"two_sided_exit",
         [&](double, double, double x) {
             return two_sided_exit(p, x, opt.a, opt.q,
                                   opt.branch == "down" ? ExitBranch::downward
                                                        : ExitBranch::upward);
         }},
        {"exp_functional",
         [&](double, double, double) {
             return exp_functional_transform(p, opt.a, opt.q,
                                             opt.branch == "stay"
                                                 ? ExpFunctionalBranch::never_crossed
                                                 : ExpFunctionalBranch::crossed);
         }},
        {"recip_exp_functional",
         [&](double, double lam, double) {
             return recip_exp_functional_transform(p, opt.m_star, lam);
         }},
        {"sup_prop4",
         [&](double, double, double) {
             return sup_before_last_passage(opt.m_star, opt.y, opt.z);
         }},
        {"xi_exponent",
         [&](double, double lam, double) {
             return xi_exponent(p.alpha, XiExponents::canonical_m(p), lam);
         }},
        {"xi_star_exponent",
         [&](double, double lam, double) { return xi_star_exponent(p.alpha, opt.m_star, lam); }},
        {"tail_asymptotic",
         [&](double t, double, double) { return extinction_tail_asymptotic(p, t); }},
        {"entrance_law_mass",
         [&](double t, double, double) {
             return entrance_law_expectation(p, XiExponents::canonical_m(p), t,
                                             [](double) { return 1.0; });
         }},
    };

    auto it = formulas.find(opt.formula);
    if (it == formulas.end()) {
        std::cerr << "unknown formula '" << opt.formula << "'; available:";
        for (const auto& kv : formulas) std::cerr << " " << kv.first;
        std::cerr << "\n";
        return 1;
    }
    std::cout << "t,lambda,x,value\n";
    for (double t : opt.t)
        for (double lam : opt.lambda)
            for (double x : opt.x)
                std::cout << fmt(t) << ',' << fmt(lam) << ',' << fmt(x) << ','
                          << fmt(it->second(t, lam, x)) << '\n';
    return 0;
}

// -------------------------------------------------------------------- verify

int cmd_verify(const std::string& config_path, const std::string& json_out,
               const std::string& csv_out, bool list_only) {
    if (list_only) {
        std::cout << registry_help();
        return 0;
    }
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "verify: cannot read config " << config_path << "\n";
        return 1;
    }
    std::stringstream buf;
    buf << in.rdbuf();

    RunConfig config;
    try {
        config = parse_config_json(buf.str());
    } catch (const std::exception& e) {
        std::cerr << "verify: " << e.what() << "\n";
        return 1;
    }
    const Report report = run_suite(config);
    if (!json_out.empty()) {
        std::ofstream os(json_out);
        os << report_to_json(report, false);
    }
    if (!csv_out.empty()) {
        std::ofstream os(csv_out);
        os << report_to_csv(report);
    }
    std::cout << report_to_csv(report);
    std::cout << (report.all_pass ? "ALL PASS" : "FAILURES PRESENT") << " ("
              << report.checks.size() << " checks)\n";
    return report.all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"alpha-stable continuous-state branching toolkit"};
    app.require_subcommand(1);

    SimulateOpts sim;
    auto* simulate = app.add_subcommand("simulate", "sample paths to CSV");
    simulate->add_option("--process", sim.process, "stable|cb|cbi|dual-conditioned")
        ->check(CLI::IsMember({"stable", "cb", "cbi", "dual-conditioned"}));
    simulate->add_option("--alpha", sim.alpha, "stability index in (1,2]")->required();
    simulate->add_option("--c-plus", sim.c_plus, "scale of the exponent (default per model)");
    simulate->add_option("--x0", sim.x0, "initial value");
    simulate->add_option("--dt", sim.dt, "base step");
    simulate->add_option("--horizon", sim.horizon, "time horizon (clock time for cb/cbi)");
    simulate->add_option("--paths", sim.paths, "number of paths");
    simulate->add_option("--seed", sim.seed, "master seed");
    simulate->add_option("--eta", sim.eta, "relative step scale");
    simulate->add_option("--out", sim.out, "output CSV (stdout when omitted)");

    EvalOpts ev;
    auto* eval = app.add_subcommand("eval", "evaluate closed forms over parameter grids");
    eval->add_option("--formula", ev.formula, "formula name")->required();
    eval->add_option("--alpha", ev.alpha, "stability index");
    eval->add_option("--c-plus", ev.c_plus, "scale");
    eval->add_option("--t", ev.t, "time grid")->delimiter(',');
    eval->add_option("--lambda", ev.lambda, "transform argument grid")->delimiter(',');
    eval->add_option("--x", ev.x, "state grid")->delimiter(',');
    eval->add_option("--q", ev.q, "discount rate");
    eval->add_option("--a", ev.a, "barrier");
    eval->add_option("--y", ev.y, "level y");
    eval->add_option("--z", ev.z, "level z");
    eval->add_option("--u", ev.u, "level u (negative)");
    eval->add_option("--v", ev.v, "level v (negative, below u)");
    eval->add_option("--m-star", ev.m_star, "mean of the upward exponent");
    eval->add_option("--branch", ev.branch, "up|down (exit), cross|stay (functional)");

    std::string config_path, json_out, csv_out;
    bool list_only = false;
    auto* verify = app.add_subcommand("verify", "run a verification suite");
    verify->add_option("--config", config_path, "JSON suite config");
    verify->add_option("--out", json_out, "write the JSON report here");
    verify->add_option("--csv", csv_out, "write the CSV summary here");
    verify->add_flag("--list", list_only, "print the identity registry and exit");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(sim);
        if (eval->parsed()) return cmd_eval(ev);
        if (verify->parsed()) {
            if (!list_only && config_path.empty()) {
                std::cerr << "verify: --config or --list required\n";
                return 1;
            }
            return cmd_verify(config_path, json_out, csv_out, list_only);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
