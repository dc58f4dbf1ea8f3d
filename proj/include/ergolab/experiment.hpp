#pragma once

// Config-driven experiments: a single JSON document selects the experiment
// kind, the system, the observables and the parameters. Results are a CSV of
// checkpoint rows, a JSON sidecar holding the fully resolved config, and for
// limit comparisons a separate report.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergolab/dynsys.hpp"

namespace ergolab {

using Json = nlohmann::ordered_json;

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ResultRow {
    std::int64_t N = 0;
    double value_re = 0.0;
    double value_im = 0.0;
    double dispersion = 0.0;
    std::int64_t flags = 0;
    double wall_ms = 0.0;
};

struct ExperimentResult {
    std::string name;
    std::vector<ResultRow> rows;
    Json sidecar;
    std::optional<Json> limit_report;
    std::vector<std::string> warnings;
    double bound = 1.0;  // product of observable bounds
};

inline constexpr const char* kVersion = "0.1.0";

/// Fills defaults and checks required keys; throws ConfigError naming the
/// offending key.
Json resolve_config(const Json& raw);

/// Runs a resolved or raw config.
ExperimentResult run_experiment(const Json& config);

/// Builds systems and observables from their JSON descriptions.
MPSystem parse_system(const Json& spec);
Observable parse_observable(const Json& spec, const MPSystem& system);

/// CSV with header N,value_re,value_im,dispersion,flags,ms. The ms column is
/// written as 0 unless `timing` is set, so reruns stay byte-identical.
std::string to_csv(const std::vector<ResultRow>& rows, bool timing);

/// Applies "a.b.c=value"; the value is read as JSON when it parses, else as a string.
void apply_override(Json& config, const std::string& assignment);

/// Built-in experiments by name.
const std::map<std::string, std::string>& preset_catalog();

/// Reads a config file, a sidecar (its "config" member), or a preset name.
Json load_config(const std::string& path_or_preset);

struct AssertOutcome {
    bool ok = true;
    std::vector<std::string> messages;
};

/// Compares a result with the entry for its name in an expectations document.
AssertOutcome check_expectations(const ExperimentResult& result, const Json& expectations);

/// Writes <dir>/<name>.csv, <dir>/<name>.json and, when present,
/// <dir>/<name>.limit.json. Returns the CSV path.
std::string write_outputs(const ExperimentResult& result, const std::string& dir, bool timing);

}  // namespace ergolab
