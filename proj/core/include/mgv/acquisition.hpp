#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgv/experience.hpp"
#include "mgv/knowledge_store.hpp"
#include "mgv/rng.hpp"

namespace mgv {

struct LearnItem {
    int id = 0;
    double latent_difficulty = 0.5;  // (0, 1], ground truth known only to the environment
    double mastery = 0.0;            // [0, 1]
};

struct AcquisitionConfig {
    double target_performance = 0.9;
    double retention_discount = 0.0;
    double total_resources_per_cycle = 1.0;
    std::vector<LearnItem> items;
    int max_cycles = 50;  // 0 means unbounded
    double feel_prob = 0.5;
    double jol_noise = 0.05;
    double learning_rate = 1.0;
    double epsilon = 1e-6;
    TagSet task_tags{"study"};
    std::string fallback_strategy = "rehearsal";

    void validate() const;
};

/// Mastery criterion rho* (1 + delta). Written as rho* + rho* delta, which
/// is the same quantity and reproduces the decimal worked examples exactly.
double compute_norm_of_study(double target_performance, double retention_discount);

/// Splits `total` across items in inverse proportion to their EOL/FOK
/// signal. Signals are clamped to [epsilon, 1] before inversion.
std::map<int, double> allocate_resources(const std::map<int, double>& signals, double total,
                                         double epsilon = 1e-6);

enum class AcquisitionStatus { Completed, Unfinished };

struct ItemStep {
    int item = 0;
    ExperienceTuple tuple;
    double mastery = 0.0;
    double jol = 0.0;
    bool removed = false;
};

struct AcquisitionCycle {
    int cycle = 0;
    std::vector<int> active_before;
    std::vector<int> active_after;
    std::vector<ItemStep> items;
};

struct AcquisitionState {
    int cycle = 0;
    std::set<int> active_items;
    double norm_of_study = 0.0;
    std::map<int, double> jols;
    std::vector<ExperienceTuple> trace;
};

struct AcquisitionResult {
    AcquisitionState state;
    AcquisitionStatus status = AcquisitionStatus::Unfinished;
    std::vector<AcquisitionCycle> cycles;
    std::vector<LearnItem> final_items;
    double total_resources = 0.0;
    std::size_t consolidated = 0;
    bool norm_exceeds_jol_ceiling = false;

    int cycles_used() const noexcept { return static_cast<int>(cycles.size()); }
    std::size_t items_mastered() const noexcept {
        return final_items.size() - state.active_items.size();
    }
};

AcquisitionResult run_acquisition(const AcquisitionConfig& config, KnowledgeStore& store, Rng& rng);

const char* to_string(AcquisitionStatus s) noexcept;
void to_json(nlohmann::json& j, const ItemStep& s);
void to_json(nlohmann::json& j, const AcquisitionCycle& c);

}  // namespace mgv
