#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgv/experience.hpp"
#include "mgv/knowledge_store.hpp"
#include "mgv/rng.hpp"

namespace mgv {

/// Success criteria and stopping budgets for one Flavell run.
struct GoalSpec {
    double success_threshold = 0.8;
    int max_cycles = 20;
    int failure_streak_limit = 3;
    double resource_budget = 100.0;

    /// Throws std::invalid_argument on an out-of-range field.
    void validate() const;
};

enum class MetaStrategyKind { Coherence, Plausibility, Consistency, GoalConduciveness };
enum class EvaluativeSignal { Fragmented, Doubtful, Unexpected, UncertainProgress };

enum class RunStatus { Active, Terminated, Abandoned };
enum class AbandonReason { None, StrategyFailure, ResourceExhausted, IrreducibleDiscrepancy };

struct CycleStatus {
    RunStatus status = RunStatus::Active;
    AbandonReason reason = AbandonReason::None;

    bool active() const noexcept { return status == RunStatus::Active; }
    bool operator==(const CycleStatus&) const = default;

    static CycleStatus goal_achieved() { return {RunStatus::Terminated, AbandonReason::None}; }
    static CycleStatus abandoned(AbandonReason r) { return {RunStatus::Abandoned, r}; }
};

/// `cycle` counts completed cycles, so it always equals history.size().
struct CycleState {
    CycleStatus status;
    int cycle = 0;
    std::vector<ExperienceTuple> history;
    TagSet task_tags;
    GoalSpec goal;
};

struct ExecutionResult {
    double outcome_quality = 0.0;  // [-1, 1]
    double completeness = 1.0;     // [0, 1]
};

/// Object-level task the cycle controls. Implementations must be
/// deterministic given their inputs and the rng stream position.
class TaskEnvironment {
public:
    virtual ~TaskEnvironment() = default;

    /// Feeling of difficulty before any outcome is known, in [0, 1].
    virtual double initial_difficulty() const { return 0.5; }
    virtual ExecutionResult execute(const std::string& strategy_id, double resources, Rng& rng) = 0;
    virtual double meta_evaluate(double outcome, MetaStrategyKind kind) = 0;
};

struct FlavellConfig {
    double feel_prob = 0.5;
    double base_resources = 1.0;
};

/// Per-cycle record emitted by run_cycle.
struct FlavellStep {
    ExperienceTuple tuple;
    double completeness = 1.0;
    EvaluativeSignal signal = EvaluativeSignal::UncertainProgress;
    MetaStrategyKind meta_strategy = MetaStrategyKind::GoalConduciveness;
    double meta_outcome = 0.0;
    std::vector<std::string> retrieved;
    CycleStatus status;
};

struct FlavellResult {
    CycleState state;
    std::vector<FlavellStep> trace;
};

/// Two-phase selection: keep STM strategies whose tags meet the task tags,
/// then take the highest smoothed success rate, ties to the smallest id.
/// The difficulty experience scales resources in run_cycle and does not
/// change the ranking.
std::string select_cognitive_strategy(const ExperienceVector& difficulty,
                                      std::span<const KnowledgeItem> stm_strategies,
                                      const TagSet& task_tags);

MetaStrategyKind select_meta_strategy(EvaluativeSignal signal) noexcept;

/// Classifies an outcome into one of the four evaluative signals. Checked in
/// order: Doubtful (negative), Unexpected (jump > 0.5), Fragmented
/// (completeness < 1), otherwise UncertainProgress.
EvaluativeSignal classify_evaluation(double outcome, std::optional<double> previous_outcome,
                                     double completeness) noexcept;

/// Priority: goal > strategy failure > resource > irreducible discrepancy.
/// `state.history` must already contain the cycle that produced last_outcome.
CycleStatus check_termination(const CycleState& state, double last_outcome);

FlavellResult run_cycle(const TagSet& task_tags, const GoalSpec& goal, TaskEnvironment& env,
                        KnowledgeStore& store, const FlavellConfig& config, Rng& rng);

const char* to_string(MetaStrategyKind k) noexcept;
const char* to_string(EvaluativeSignal s) noexcept;
const char* to_string(RunStatus s) noexcept;
const char* to_string(AbandonReason r) noexcept;

void to_json(nlohmann::json& j, const CycleStatus& s);
void to_json(nlohmann::json& j, const FlavellStep& s);

}  // namespace mgv
