#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "csbp/stats.hpp"

namespace csbp {

using ParamMap = std::map<std::string, double>;

/// One verification record: a named identity, the closed-form target, the
/// seeded Monte Carlo result, and the pass decision under the declared error
/// policy (|mean - closed_form| <= 4*stderr + bias_budget for moment checks;
/// a statistic budget or p-value floor for KS checks).
struct IdentityCheck {
    std::string name;
    ParamMap params;
    double closed_form = 0.0;
    MCEstimate estimate;
    double z = 0.0;  // (mean - closed_form)/stderr, 0 when stderr is 0
    std::optional<KSResult> ks;
    double bias_budget = 0.0;
    std::optional<double> ess;
    std::optional<double> acceptance_rate;
    bool pass = false;
    std::string note;
    double runtime_s = 0.0;  // excluded from the canonical report payload
};

struct IdentitySpec {
    std::string name;
    ParamMap params;
    std::size_t n_paths = 10000;
    double dt = 1e-3;
    std::optional<std::uint64_t> seed;  // default: derived from the master seed
};

struct RunConfig {
    int version = 1;
    std::uint64_t master_seed = 1;
    std::vector<IdentitySpec> identities;
};

struct Report {
    std::vector<IdentityCheck> checks;
    bool all_pass = true;
};

/// Registry keys accepted by run_identity.
const std::vector<std::string>& identity_registry();

/// Human-readable registry table (key, parameters, what it verifies).
std::string registry_help();

/// Runs one named identity. Deterministic given (name, params, n_paths, dt,
/// seed). Unknown names and malformed parameter records are rejected before
/// any simulation starts.
IdentityCheck run_identity(const std::string& name, const ParamMap& params, std::size_t n_paths,
                           double dt, std::uint64_t seed);

/// Runs every identity in the config (paths fan out across workers inside
/// each identity; reductions are fixed-order, so the payload is independent
/// of the worker count).
Report run_suite(const RunConfig& config);

/// Strict JSON config parsing: version field required, unknown keys rejected,
/// array-valued parameters expand as a Cartesian grid.
RunConfig parse_config_json(const std::string& text);

/// Canonical JSON payload (runtimes excluded unless requested): identical
/// (config, seed) pairs produce byte-identical output.
std::string report_to_json(const Report& report, bool include_runtime = false);

/// CSV summary: name, closed_form, estimate, stderr, z, ks, p, pass, runtime_s.
std::string report_to_csv(const Report& report);

}  // namespace csbp
