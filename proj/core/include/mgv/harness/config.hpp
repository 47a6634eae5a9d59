#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgv/acquisition.hpp"
#include "mgv/flavell.hpp"
#include "mgv/harness/environments.hpp"
#include "mgv/knowledge_store.hpp"
#include "mgv/planning.hpp"
#include "mgv/recall_mdp.hpp"
#include "mgv/retrieval.hpp"

namespace mgv::harness {

enum class Mode { Flavell, Acquire, Retrieve, Bandit, Plan, RecallMdp };

struct FlavellParams {
    TagSet task_tags;
    GoalSpec goal;
    FlavellConfig cycle;
    KnowledgeStore store;
    SyntheticTaskSpec environment;
};

struct AcquireParams {
    AcquisitionConfig acquisition;
    KnowledgeStore store;
};

struct RetrieveParams {
    TagSet query;
    RetrievalConfig retrieval;
    KnowledgeStore store;
    CueEnvironmentSpec environment;
};

struct BanditParams {
    BanditTaskSpec task;
    int episodes = 500;
    double prior_variance = 1.0;
    double utility_noise_variance = 0.25;
    double time_noise_variance = 0.25;
    double gamma_prior_reward = 0.0;
    double gamma_prior_time = 1.0;
};

struct PlanParams {
    PlanningTree tree;
    std::optional<std::vector<double>> values;  // sampled from the priors when absent
    double lambda = 0.0;
};

struct RecallParams {
    RecallMdpConfig mdp;
    std::vector<double> drifts;  // simulation is skipped when empty
    int episodes = 0;
};

using ModeParams =
    std::variant<FlavellParams, AcquireParams, RetrieveParams, BanditParams, PlanParams, RecallParams>;

struct RunConfig {
    Mode mode = Mode::Flavell;
    std::uint64_t seed = 0;
    std::string output = "trace.jsonl";
    ModeParams params;
};

/// Values supplied on the command line. They win over the file and may
/// stand in for fields the file leaves out.
struct ConfigOverrides {
    std::optional<Mode> mode;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output;
};

const char* to_string(Mode m) noexcept;
/// Throws ValidationError("mode") on an unknown name.
Mode parse_mode(const std::string& name);

/// Accepts either a full document {mode, seed, output, params} or a bare
/// parameter block (mode and seed then come from `overrides`).
RunConfig parse_config(const nlohmann::json& doc, const ConfigOverrides& overrides = {});
RunConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

/// Full document with every default written out.
nlohmann::json config_to_json(const RunConfig& config);
void save_config(const RunConfig& config, const std::filesystem::path& path);

/// Reads a JSON file, mapping I/O and syntax problems to MissingFile / ParseError.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace mgv::harness
