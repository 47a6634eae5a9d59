#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgv/experience.hpp"
#include "mgv/rng.hpp"

namespace mgv {

using TagSet = std::set<std::string>;

enum class Category { Agent, Task, Strategy, MetaStrategy };

struct CalibrationRecord {
    double fok_magnitude = 0.0;
    double confidence = 0.0;
    bool was_correct = false;

    bool operator==(const CalibrationRecord&) const = default;
};

struct KnowledgeItem {
    std::string id;
    Category category = Category::Strategy;
    TagSet tags;
    std::vector<double> features;
    int successes = 0;
    int failures = 0;
    std::vector<CalibrationRecord> calibration_records;

    /// Laplace-smoothed empirical success rate, (s + 1) / (s + f + 2).
    double smoothed_success_rate() const noexcept;

    bool operator==(const KnowledgeItem&) const = default;
};

struct Thresholds {
    double lambda_fok = 0.0;
    double lambda_confidence = 0.0;
};

/// Long-term knowledge plus the short-term working set drawn from it.
/// STM is always a subset of the LTM keys; pruning an item drops it from
/// both.
class KnowledgeStore {
public:
    static constexpr int kDefaultPruneMargin = 5;

    KnowledgeStore(double access_prob = 1.0, double encoding_rate = 1.0,
                   int prune_margin = kDefaultPruneMargin);

    double access_prob() const noexcept { return access_prob_; }
    double encoding_rate() const noexcept { return encoding_rate_; }
    int prune_margin() const noexcept { return prune_margin_; }

    const std::map<std::string, KnowledgeItem>& ltm() const noexcept { return ltm_; }
    const std::set<std::string>& stm() const noexcept { return stm_; }

    /// Inserts or replaces an LTM item.
    void add(KnowledgeItem item);
    const KnowledgeItem* find(const std::string& id) const;
    bool contains(const std::string& id) const { return ltm_.count(id) != 0; }

    /// STM items in id order, optionally restricted to one category.
    std::vector<KnowledgeItem> stm_items() const;
    std::vector<KnowledgeItem> stm_items(Category category) const;

    /// Copies each LTM item sharing at least one tag with `query` into STM
    /// with probability access_prob. Items already in STM are skipped and
    /// consume no draw. Returns the newly added ids.
    std::vector<std::string> retrieve_probabilistic(const TagSet& query, Rng& rng);

    /// Writes each tuple to LTM with probability encoding_rate as a fresh
    /// item; existing items are never touched. Tuples carrying a confidence
    /// become Task items holding one calibration record, the rest become
    /// Strategy items with counters seeded from the outcome sign.
    std::size_t consolidate(std::span<const ExperienceTuple> tuples, Rng& rng);

    /// Add / revise / delete: bumps the strategy's counters by outcome sign,
    /// creates the strategy when unknown, then prunes every item whose
    /// failures exceed its successes by more than the prune margin.
    void update_knowledge(const ExperienceTuple& tuple);

    /// Medians of FOK magnitude and confidence over correct calibration
    /// records of the STM items. Throws NoCalibrationHistory when none exist.
    Thresholds calibrate_thresholds() const;

    nlohmann::json to_json() const;
    static KnowledgeStore from_json(const nlohmann::json& j);

    bool operator==(const KnowledgeStore&) const = default;

private:
    void prune();

    double access_prob_;
    double encoding_rate_;
    int prune_margin_;
    std::map<std::string, KnowledgeItem> ltm_;
    std::set<std::string> stm_;
    std::size_t next_serial_ = 0;
};

/// Median with the even-count convention (mean of the middle pair).
/// Precondition: non-empty.
double median(std::vector<double> values);

void to_json(nlohmann::json& j, const Category& c);
void from_json(const nlohmann::json& j, Category& c);
void to_json(nlohmann::json& j, const KnowledgeItem& item);
void from_json(const nlohmann::json& j, KnowledgeItem& item);

}  // namespace mgv
