#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bsde {

// Raised for anything wrong with a configuration: malformed JSON, unknown
// keys or fixture names, out-of-range values, or checks the fixture cannot
// support. Callers map it to exit code 2; it is always thrown before any
// output file is written.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A fully resolved experiment description. Every field has a default except
// the fixture name, so a minimal config is {"fixture": "zero_driver"}.
//
// `out_dir` and `workers` are execution details: they never change results
// (the ensemble is counter-based), so the normalized form and the config
// hash exclude them and identical science yields identical artifacts no
// matter where or how parallel it ran.
struct ExperimentConfig {
    std::string fixture;

    bool horizon_set = false;      // false -> the fixture's default horizon
    bool horizon_infinite = false; // JSON value "inf"
    double horizon = 0.0;
    std::string scheme = "default";  // "default" | "uniform" | "mapped"
    int steps = 64;

    int paths = 4096;
    std::uint64_t seed = 2026;
    int workers = 1;
    int degree = 3;  // regression basis degree

    double picard_tol = 1e-8;
    int picard_max_iters = 50;
    int picard_min_iters = 3;
    double contraction_threshold = 0.5;
    double init_z = 0.0;

    double p = 2.0;
    bool beta_set = false;  // set -> run the truncation ladder at this rate
    double beta = 0.0;
    std::vector<double> levels{2.0, 4.0, 8.0, 16.0};

    std::vector<std::string> checks{"assumptions", "residual"};
    double residual_tol = 0.05;
    double violation_cap = 0.01;
    double constant_cap = 1e4;

    std::string out_dir;  // empty -> "."
};

// Check names accepted in a config's "checks" array.
std::vector<std::string> known_checks();

// Parse a JSON config. Strict: unknown keys, unresolvable names, and
// out-of-range values all throw ConfigError.
ExperimentConfig parse_config(const std::string& json_text);

// Canonical JSON form of the semantic fields (sorted keys, defaults filled
// in, execution details dropped). Parsing it back yields the same form.
std::string normalized_json(const ExperimentConfig& cfg);

// FNV-1a 64-bit hash of the normalized form, as 16 hex digits.
std::string config_hash_hex(const ExperimentConfig& cfg);

// Outcome of a run: exit code 0 when every requested check passed, 1
// otherwise; the files written (full paths, manifest last); per-check
// results; and the path-mean of y at the first node for quick inspection.
struct RunArtifacts {
    int exit_code = 0;
    std::vector<std::string> files;
    std::vector<std::pair<std::string, bool>> checks;
    double y0_mean = 0.0;
};

// Solve the configured problem and write the artifact set into out_dir:
//   solution.csv        per-node path statistics (t, mean y, std y, mean |z|)
//   picard.json         interval reports (or ladder.json for a beta run)
//   estimates.csv       one row per estimate-check fit
//   assumptions.json    claim certification rows (when requested)
//   manifest.json       seed, revision, config hash, file list, check results
// All computation happens before the first write, so failures configured as
// errors leave the output directory untouched.
RunArtifacts run_experiment(const ExperimentConfig& cfg);

// Print the claim-certification table for a fixture to `table` and write
// assumptions.json into out_dir. Returns 0 when all claimed properties hold,
// 1 otherwise; throws ConfigError for unknown fixtures.
int write_assumption_report(const std::string& fixture, const std::string& out_dir,
                            std::ostream& table, std::uint64_t seed = 2026);

}  // namespace bsde
