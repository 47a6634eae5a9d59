#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgv/harness/config.hpp"
#include "mgv/harness/trace.hpp"
#include "mgv/recall_mdp.hpp"

namespace mgv::harness {

struct RunOptions {
    int repeat = 1;
    /// Recall mode only; default to <output stem>.policy.json / .threshold.csv.
    std::optional<std::filesystem::path> policy_path;
    std::optional<std::filesystem::path> threshold_path;
};

/// Result of one run (one repeat index) held in memory.
struct RunOutput {
    std::string run_id;
    std::vector<TraceRecord> records;
    nlohmann::json summary;
    std::vector<std::string> warnings;
    std::optional<PolicyTable> policy;
    std::vector<std::optional<double>> thresholds;
};

struct RunArtifacts {
    nlohmann::json summary;
    std::vector<std::filesystem::path> files;
    std::vector<std::string> warnings;
};

/// Runs repeat `index` of `config` on its own substream of the root seed.
RunOutput execute(const RunConfig& config, std::size_t index = 0);

/// Executes every repeat, writes the trace JSONL, the summary JSON and any
/// mode artifacts, and returns the merged summary.
RunArtifacts run(const RunConfig& config, const RunOptions& options = {});

/// trace.jsonl -> trace.summary.json
std::filesystem::path summary_path_for(const std::filesystem::path& trace);

/// "t,z_threshold" rows; an absent threshold is an empty field.
std::string threshold_csv(const std::vector<std::optional<double>>& thresholds);

}  // namespace mgv::harness
