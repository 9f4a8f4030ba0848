#pragma once

#include "iak/bounds.hpp"
#include "iak/envs.hpp"
#include "iak/io.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace iak {

/// Log levels gated by the IAK_LOG environment variable (off, error, info, debug).
enum class LogLevel { off = 0, error = 1, info = 2, debug = 3 };
LogLevel log_level();
void log_line(LogLevel level, const std::string& msg);

inline constexpr int kSchemaVersion = 1;

enum class SweepAxis { epsilon, influence, lambda };

struct ExperimentConfig {
    Json env_spec; // {"name": ..., optional parameter overrides}
    std::vector<std::string> algorithms;
    SweepAxis axis = SweepAxis::epsilon;
    std::vector<double> grid;
    CpsConfig cps;
    bool cps_mode_explicit = false;
    ApuConfig apu;
    std::vector<std::uint64_t> seeds{0};
    std::uint64_t master_seed = 0;
    int threads = 1;

    void validate() const;
};

ExperimentConfig experiment_config_from_json(const Json& j);
EnvBundle build_env(const Json& env_spec);

struct ResultRow {
    std::string algorithm;
    double axis_value = 0.0;
    std::optional<std::uint64_t> seed;
    double cost = 0.0;
    double gap_or_dist = 0.0;
    bool feasible = false;
    std::optional<Json> policy; // executed policy, present when one was produced
    double wall_seconds = 0.0;
    std::string error;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    std::string env_name;
    std::string axis_name;
};

/// Runs every (algorithm, grid value[, seed]) cell, fanning grid cells out to a
/// worker pool; row order is independent of scheduling.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::string results_to_csv(const ExperimentResult& result);
/// Writes results.csv, per-row policy JSONs and summary.json into out_dir.
void write_run_outputs(const std::string& out_dir, const ExperimentConfig& cfg,
                       const ExperimentResult& result);

/// Theorem-2 bound always, theorem-3 and the transition-independent variant only
/// when their assumption checks pass.
Json bounds_report_json(const EnvBundle& env, double epsilon, CostNorm p);

/// Cost-vs-axis line chart, one polyline per algorithm, "inf" entries drawn as
/// top-edge markers. Self-contained SVG.
std::string plot_svg(const std::string& results_csv);

} // namespace iak
