#include "mgv/flavell.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mgv/errors.hpp"

namespace mgv {

void GoalSpec::validate() const {
    if (!(success_threshold >= 0.0 && success_threshold <= 1.0)) {
        throw std::invalid_argument("goal.success_threshold must lie in [0,1]");
    }
    if (max_cycles < 1) throw std::invalid_argument("goal.max_cycles must be >= 1");
    if (failure_streak_limit < 1) {
        throw std::invalid_argument("goal.failure_streak_limit must be >= 1");
    }
    if (!(resource_budget >= 0.0)) {
        throw std::invalid_argument("goal.resource_budget must be >= 0");
    }
}

namespace {

bool intersects(const TagSet& a, const TagSet& b) {
    return std::any_of(a.begin(), a.end(), [&](const auto& t) { return b.count(t) != 0; });
}

std::vector<const KnowledgeItem*> applicable(std::span<const KnowledgeItem> items,
                                             const TagSet& task_tags) {
    std::vector<const KnowledgeItem*> out;
    for (const auto& item : items) {
        if (item.category == Category::Strategy && intersects(item.tags, task_tags)) {
            out.push_back(&item);
        }
    }
    return out;
}

}  // namespace

std::string select_cognitive_strategy(const ExperienceVector& /*difficulty*/,
                                      std::span<const KnowledgeItem> stm_strategies,
                                      const TagSet& task_tags) {
    const auto candidates = applicable(stm_strategies, task_tags);
    if (candidates.empty()) throw NoApplicableStrategy();
    const KnowledgeItem* best = candidates.front();
    for (const auto* c : candidates) {
        const double rate = c->smoothed_success_rate();
        const double best_rate = best->smoothed_success_rate();
        if (rate > best_rate || (rate == best_rate && c->id < best->id)) best = c;
    }
    return best->id;
}

MetaStrategyKind select_meta_strategy(EvaluativeSignal signal) noexcept {
    switch (signal) {
        case EvaluativeSignal::Fragmented: return MetaStrategyKind::Coherence;
        case EvaluativeSignal::Doubtful: return MetaStrategyKind::Plausibility;
        case EvaluativeSignal::Unexpected: return MetaStrategyKind::Consistency;
        case EvaluativeSignal::UncertainProgress: return MetaStrategyKind::GoalConduciveness;
    }
    return MetaStrategyKind::GoalConduciveness;
}

EvaluativeSignal classify_evaluation(double outcome, std::optional<double> previous_outcome,
                                     double completeness) noexcept {
    if (outcome < 0.0) return EvaluativeSignal::Doubtful;
    if (previous_outcome && std::abs(outcome - *previous_outcome) > 0.5) {
        return EvaluativeSignal::Unexpected;
    }
    if (completeness < 1.0) return EvaluativeSignal::Fragmented;
    return EvaluativeSignal::UncertainProgress;
}

CycleStatus check_termination(const CycleState& state, double last_outcome) {
    if (!state.status.active()) return state.status;
    const auto& goal = state.goal;
    if (last_outcome >= goal.success_threshold) return CycleStatus::goal_achieved();

    const auto& h = state.history;
    const std::size_t n = h.size();
    const auto k = static_cast<std::size_t>(goal.failure_streak_limit);

    if (n >= k && std::all_of(h.end() - static_cast<std::ptrdiff_t>(k), h.end(),
                              [](const auto& t) { return t.outcome_quality < 0.0; })) {
        return CycleStatus::abandoned(AbandonReason::StrategyFailure);
    }

    const double spent = std::accumulate(h.begin(), h.end(), 0.0,
                                         [](double s, const auto& t) { return s + t.resources; });
    if (spent > goal.resource_budget || state.cycle >= goal.max_cycles) {
        return CycleStatus::abandoned(AbandonReason::ResourceExhausted);
    }

    if (n >= 2 * k) {
        auto best_in = [&](std::size_t from, std::size_t to) {
            double best = -INFINITY;
            for (std::size_t i = from; i < to; ++i) best = std::max(best, h[i].outcome_quality);
            return best;
        };
        if (best_in(n - k, n) <= best_in(n - 2 * k, n - k)) {
            return CycleStatus::abandoned(AbandonReason::IrreducibleDiscrepancy);
        }
    }
    return {};
}

namespace {

// Knowledge-based difficulty: one minus the best smoothed success rate among
// applicable strategies; absent when nothing applies.
std::optional<double> assess_difficulty(std::span<const KnowledgeItem> strategies,
                                        const TagSet& task_tags) {
    const auto candidates = applicable(strategies, task_tags);
    if (candidates.empty()) return std::nullopt;
    double best = 0.0;
    for (const auto* c : candidates) best = std::max(best, c->smoothed_success_rate());
    return 1.0 - best;
}

}  // namespace

FlavellResult run_cycle(const TagSet& task_tags, const GoalSpec& goal, TaskEnvironment& env,
                        KnowledgeStore& store, const FlavellConfig& config, Rng& rng) {
    goal.validate();
    if (task_tags.empty()) throw std::invalid_argument("task_tags must be non-empty");

    FlavellResult result;
    CycleState& state = result.state;
    state.task_tags = task_tags;
    state.goal = goal;

    std::optional<double> previous_outcome;
    std::string previous_strategy;
    MetaStrategyKind previous_meta = MetaStrategyKind::GoalConduciveness;

    while (state.status.active()) {
        const int tau = state.cycle;

        // MONITOR
        TagSet query = task_tags;
        if (tau > 0) {
            query.insert(previous_strategy);
            query.insert(to_string(previous_meta));
        }
        auto retrieved = store.retrieve_probabilistic(query, rng);
        const auto strategies = store.stm_items(Category::Strategy);
        const double raw_difficulty =
            previous_outcome ? (1.0 - *previous_outcome) / 2.0 : env.initial_difficulty();
        const auto difficulty = generate_experience(
            raw_difficulty, assess_difficulty(strategies, task_tags), config.feel_prob, rng);

        // GENERATE
        std::string chosen;
        try {
            chosen = select_cognitive_strategy(difficulty, strategies, task_tags);
        } catch (const NoApplicableStrategy&) {
            state.status = CycleStatus::abandoned(AbandonReason::StrategyFailure);
            break;
        }
        const double resources = config.base_resources * (1.0 + difficulty.primary);
        const auto executed = env.execute(chosen, resources, rng);
        const double quality = std::clamp(executed.outcome_quality, -1.0, 1.0);

        // VERIFY
        const auto* chosen_item = store.find(chosen);
        const auto evaluative = generate_experience(
            (quality + 1.0) / 2.0,
            chosen_item ? std::optional<double>(chosen_item->smoothed_success_rate()) : std::nullopt,
            config.feel_prob, rng);
        const auto signal = classify_evaluation(quality, previous_outcome, executed.completeness);
        const auto meta = select_meta_strategy(signal);
        const double meta_outcome = std::clamp(env.meta_evaluate(quality, meta), -1.0, 1.0);

        ExperienceTuple tuple;
        tuple.cycle = tau;
        tuple.experience = {difficulty.primary, evaluative.primary, difficulty.mode};
        tuple.strategy_id = chosen;
        tuple.resources = resources;
        tuple.outcome_quality = quality;

        // The meta-level verdict is blended into the knowledge update.
        ExperienceTuple revision = tuple;
        revision.outcome_quality = 0.5 * (quality + meta_outcome);
        store.update_knowledge(revision);

        state.history.push_back(tuple);
        state.cycle = tau + 1;
        state.status = check_termination(state, quality);

        result.trace.push_back({tuple, executed.completeness, signal, meta, meta_outcome,
                                std::move(retrieved), state.status});

        previous_outcome = quality;
        previous_strategy = chosen;
        previous_meta = meta;
    }
    return result;
}

const char* to_string(MetaStrategyKind k) noexcept {
    switch (k) {
        case MetaStrategyKind::Coherence: return "coherence";
        case MetaStrategyKind::Plausibility: return "plausibility";
        case MetaStrategyKind::Consistency: return "consistency";
        case MetaStrategyKind::GoalConduciveness: return "goal_conduciveness";
    }
    return "?";
}

const char* to_string(EvaluativeSignal s) noexcept {
    switch (s) {
        case EvaluativeSignal::Fragmented: return "fragmented";
        case EvaluativeSignal::Doubtful: return "doubtful";
        case EvaluativeSignal::Unexpected: return "unexpected";
        case EvaluativeSignal::UncertainProgress: return "uncertain_progress";
    }
    return "?";
}

const char* to_string(RunStatus s) noexcept {
    switch (s) {
        case RunStatus::Active: return "active";
        case RunStatus::Terminated: return "terminated";
        case RunStatus::Abandoned: return "abandoned";
    }
    return "?";
}

const char* to_string(AbandonReason r) noexcept {
    switch (r) {
        case AbandonReason::None: return "none";
        case AbandonReason::StrategyFailure: return "strategy_failure";
        case AbandonReason::ResourceExhausted: return "resource_exhausted";
        case AbandonReason::IrreducibleDiscrepancy: return "irreducible_discrepancy";
    }
    return "?";
}

void to_json(nlohmann::json& j, const CycleStatus& s) {
    j = nlohmann::json{{"status", to_string(s.status)}, {"reason", to_string(s.reason)}};
}

void to_json(nlohmann::json& j, const FlavellStep& s) {
    j = nlohmann::json{{"tuple", s.tuple},
                       {"completeness", s.completeness},
                       {"signal", to_string(s.signal)},
                       {"meta_strategy", to_string(s.meta_strategy)},
                       {"meta_outcome", s.meta_outcome},
                       {"retrieved", s.retrieved},
                       {"status", s.status}};
}

}  // namespace mgv
