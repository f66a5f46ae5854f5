#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pinlab/distribution.hpp"
#include "pinlab/supersolution.hpp"

namespace pinlab {

enum class ExperimentKind {
    discrete_sim,
    m_stat,
    barrier,
    percolation,
    pipeline,
    continuum_verify,
    containment,
    tail_probe,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& s);

/// One experiment file:
///   { "experiment": "<kind>", "seed": 1, "distribution": {...},
///     "params": {...}, "sweep": {"F": [...]} | {"p": [...]}, "require": [...] }
/// params are validated by the experiment itself; unknown keys are errors.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::pipeline;
    std::uint64_t seed = 0;
    std::optional<StrengthDistribution> distribution;
    nlohmann::json params = nlohmann::json::object();
    std::optional<std::pair<std::string, std::vector<double>>> sweep;
    std::vector<std::string> require;  // checks that decide the exit status; empty means all
    nlohmann::json raw;

    static ExperimentConfig from_json(const nlohmann::json& j);
};

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunResult {
    std::vector<CheckResult> checks;
    nlohmann::json summary = nlohmann::json::object();  // headline numbers, flat
    std::vector<std::string> files;                     // relative to the output directory

    /// All required checks present and passing (all checks when require is empty).
    bool passed(const std::vector<std::string>& require) const;
};

/// Runs one experiment and writes its files into out_dir (created if needed).
RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Runs every grid point of config.sweep into out_dir/point_<k> and writes
/// out_dir/sweep.csv. A failing point becomes an error row.
RunResult run_sweep(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// manifest.json: config echo, tool version, seeds, files and checks. No timestamps.
void write_manifest(const std::filesystem::path& out_dir, const ExperimentConfig& config, const std::string& command,
                    const RunResult& result);

/// Field file written next to an assembly: obstacle set plus bump radii.
nlohmann::json field_to_json(const ForceField& field);
ForceField field_from_json(const nlohmann::json& j);

/// Worker count from PINLAB_WORKERS (default: hardware threads, at least 1).
std::size_t worker_count();

/// Calls body(i) for i < count on the worker pool. Nested calls run inline.
/// The exception of the smallest failing index is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Per-run seed derived from a base seed and a run index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

// CLI entry points; they return the process exit status.
int command_run(const std::filesystem::path& config, const std::filesystem::path& out, std::ostream& log);
int command_sweep(const std::filesystem::path& config, const std::filesystem::path& out, std::ostream& log);
int command_verify(const std::filesystem::path& assembly, const std::filesystem::path& field,
                   const VerifyOptions& options, std::ostream& out);

std::string tool_version();

}  // namespace pinlab
