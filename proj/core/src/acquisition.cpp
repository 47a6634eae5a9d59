#include "mgv/acquisition.hpp"

#include <algorithm>
#include <stdexcept>

#include "mgv/errors.hpp"
#include "mgv/flavell.hpp"

namespace mgv {

void AcquisitionConfig::validate() const {
    if (!(target_performance > 0.0 && target_performance <= 1.0)) {
        throw std::invalid_argument("target_performance must lie in (0,1]");
    }
    if (!(retention_discount >= 0.0)) throw std::invalid_argument("retention_discount must be >= 0");
    if (!(total_resources_per_cycle > 0.0)) {
        throw std::invalid_argument("total_resources_per_cycle must be > 0");
    }
    if (items.empty()) throw std::invalid_argument("items must be non-empty");
    if (max_cycles < 0) throw std::invalid_argument("max_cycles must be >= 0");
    if (!(feel_prob >= 0.0 && feel_prob <= 1.0)) throw std::invalid_argument("feel_prob must lie in [0,1]");
    if (!(jol_noise >= 0.0)) throw std::invalid_argument("jol_noise must be >= 0");
    if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning_rate must be >= 0");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0,1)");
    if (task_tags.empty()) throw std::invalid_argument("task_tags must be non-empty");
    std::set<int> ids;
    for (const auto& item : items) {
        if (!ids.insert(item.id).second) {
            throw std::invalid_argument("duplicate item id " + std::to_string(item.id));
        }
        if (!(item.latent_difficulty > 0.0 && item.latent_difficulty <= 1.0)) {
            throw std::invalid_argument("latent_difficulty must lie in (0,1]");
        }
        if (!(item.mastery >= 0.0 && item.mastery <= 1.0)) {
            throw std::invalid_argument("mastery must lie in [0,1]");
        }
    }
    if (max_cycles == 0) {
        // Unbounded runs must be able to finish.
        if (compute_norm_of_study(target_performance, retention_discount) > 1.0) {
            throw std::invalid_argument("unbounded run with norm of study above the JOL ceiling");
        }
        if (learning_rate <= 0.0) throw std::invalid_argument("unbounded run needs learning_rate > 0");
        for (const auto& item : items) {
            if (item.latent_difficulty >= 1.0) {
                throw std::invalid_argument("unbounded run with an unlearnable item");
            }
        }
    }
}

double compute_norm_of_study(double target_performance, double retention_discount) {
    return target_performance + target_performance * retention_discount;
}

std::map<int, double> allocate_resources(const std::map<int, double>& signals, double total,
                                         double epsilon) {
    if (!(total > 0.0)) throw std::invalid_argument("total resources must be > 0");
    std::map<int, double> weights;
    double sum = 0.0;
    for (const auto& [id, s] : signals) {
        const double w = 1.0 / std::clamp(s, epsilon, 1.0);
        weights.emplace(id, w);
        sum += w;
    }
    for (auto& [id, w] : weights) w = total * w / sum;
    return weights;
}

namespace {

std::optional<double> best_strategy_rate(const KnowledgeStore& store, const TagSet& tags) {
    std::optional<double> best;
    for (const auto& item : store.stm_items(Category::Strategy)) {
        if (std::none_of(item.tags.begin(), item.tags.end(),
                         [&](const auto& t) { return tags.count(t) != 0; })) {
            continue;
        }
        const double r = item.smoothed_success_rate();
        if (!best || r > *best) best = r;
    }
    return best;
}

}  // namespace

AcquisitionResult run_acquisition(const AcquisitionConfig& config, KnowledgeStore& store, Rng& rng) {
    config.validate();

    AcquisitionResult result;
    auto& state = result.state;
    state.norm_of_study = compute_norm_of_study(config.target_performance, config.retention_discount);
    result.norm_exceeds_jol_ceiling = state.norm_of_study > 1.0;

    std::map<int, LearnItem> items;
    for (const auto& item : config.items) {
        items.emplace(item.id, item);
        state.active_items.insert(item.id);
    }

    std::map<int, double> last_jol;
    TagSet query = config.task_tags;

    while (!state.active_items.empty() &&
           (config.max_cycles == 0 || state.cycle < config.max_cycles)) {
        const int tau = state.cycle;
        AcquisitionCycle record;
        record.cycle = tau;
        record.active_before.assign(state.active_items.begin(), state.active_items.end());

        // MONITOR: EOL on the first pass, FOK from the previous outcome after.
        store.retrieve_probabilistic(query, rng);
        const auto knowledge_rate = best_strategy_rate(store, config.task_tags);
        std::map<int, ExperienceVector> experience;
        std::map<int, double> signals;
        for (int j : state.active_items) {
            const auto& item = items.at(j);
            ExperienceVector me;
            if (tau == 0) {
                me = generate_experience(1.0 - item.latent_difficulty, knowledge_rate,
                                         config.feel_prob, rng);
            } else {
                me = generate_experience(item.mastery, last_jol.at(j), config.feel_prob, rng);
            }
            signals.emplace(j, me.primary);
            experience.emplace(j, me);
        }

        // GENERATE
        const auto allocation =
            allocate_resources(signals, config.total_resources_per_cycle, config.epsilon);
        const auto stm_strategies = store.stm_items(Category::Strategy);
        TagSet next_query = config.task_tags;

        for (int j : state.active_items) {
            auto& item = items.at(j);
            std::string strategy;
            try {
                strategy = select_cognitive_strategy(experience.at(j), stm_strategies, config.task_tags);
            } catch (const NoApplicableStrategy&) {
                strategy = config.fallback_strategy;
            }
            next_query.insert(strategy);

            const double r = allocation.at(j);
            result.total_resources += r;
            item.mastery = std::min(
                1.0, item.mastery + r * (1.0 - item.latent_difficulty) * config.learning_rate);

            // VERIFY
            double jol = item.mastery;
            if (config.jol_noise > 0.0) jol += rng.normal(0.0, config.jol_noise);
            jol = clamp_unit(jol);
            const double previous = last_jol.count(j) ? last_jol.at(j) : 0.0;
            last_jol[j] = jol;
            state.jols[j] = jol;

            ItemStep step;
            step.item = j;
            step.tuple.cycle = tau;
            step.tuple.experience = experience.at(j);
            step.tuple.experience.secondary = jol;
            step.tuple.strategy_id = strategy;
            step.tuple.resources = r;
            step.tuple.outcome_quality = std::clamp(jol - previous, -1.0, 1.0);
            step.mastery = item.mastery;
            step.jol = jol;
            step.removed = state.norm_of_study - jol <= 0.0;

            store.update_knowledge(step.tuple);
            state.trace.push_back(step.tuple);
            record.items.push_back(std::move(step));
        }

        for (const auto& step : record.items) {
            if (step.removed) state.active_items.erase(step.item);
        }
        record.active_after.assign(state.active_items.begin(), state.active_items.end());
        result.cycles.push_back(std::move(record));
        query = std::move(next_query);
        state.cycle = tau + 1;
    }

    result.status = state.active_items.empty() ? AcquisitionStatus::Completed
                                               : AcquisitionStatus::Unfinished;
    for (const auto& [id, item] : items) result.final_items.push_back(item);
    result.consolidated = store.consolidate(state.trace, rng);
    return result;
}

const char* to_string(AcquisitionStatus s) noexcept {
    return s == AcquisitionStatus::Completed ? "completed" : "unfinished";
}

void to_json(nlohmann::json& j, const ItemStep& s) {
    j = nlohmann::json{{"item", s.item}, {"tuple", s.tuple}, {"mastery", s.mastery},
                       {"jol", s.jol},   {"removed", s.removed}};
}

void to_json(nlohmann::json& j, const AcquisitionCycle& c) {
    j = nlohmann::json{{"cycle", c.cycle},
                       {"active_before", c.active_before},
                       {"active_after", c.active_after},
                       {"items", c.items}};
}

}  // namespace mgv
