#include "mgv/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mgv/errors.hpp"

namespace mgv {

void RetrievalConfig::validate() const {
    if (!(satisficing_rate >= 0.0)) throw std::invalid_argument("satisficing_rate must be >= 0");
    if (!(default_lambda_fok > 0.0)) throw std::invalid_argument("default_lambda_fok must be > 0");
    if (!(default_lambda_confidence > 0.0 && default_lambda_confidence <= 1.0)) {
        throw std::invalid_argument("default_lambda_confidence must lie in (0,1]");
    }
    if (max_cycles < 1) throw std::invalid_argument("max_cycles must be >= 1");
}

SearchIntensity search_intensity(const FokCounters& fok, double lambda_fok) {
    if (!(lambda_fok > 0.0)) throw std::invalid_argument("lambda_fok must be > 0");
    if (fok.magnitude() < lambda_fok) return SearchIntensity::Intensive;
    if (fok.plus > fok.minus) return SearchIntensity::Standard;
    return SearchIntensity::Terminate;  // includes the exact tie
}

double satisficing_factor(int cycle, int failed_attempts, double rate) {
    if (cycle < 0 || failed_attempts < 0 || !(rate >= 0.0)) {
        throw std::invalid_argument("satisficing_factor inputs must be nonnegative");
    }
    return std::exp(-rate * static_cast<double>(cycle + failed_attempts));
}

Thresholds update_thresholds(double base_lambda_fok, double base_lambda_confidence, double beta) {
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in (0,1]");
    return {base_lambda_fok * beta, base_lambda_confidence * beta};
}

OutputDecision decide_output(const std::optional<std::string>& answer, double confidence,
                             double lambda_confidence, const FokCounters& fok) {
    if (answer) {
        return confidence >= lambda_confidence ? OutputDecision::Output : OutputDecision::Continue;
    }
    return fok.plus > fok.minus ? OutputDecision::Continue : OutputDecision::OutputNull;
}

namespace {

Thresholds initial_thresholds(const KnowledgeStore& store, const RetrievalConfig& config,
                              bool& calibrated) {
    Thresholds t{config.default_lambda_fok, config.default_lambda_confidence};
    calibrated = false;
    try {
        const auto c = store.calibrate_thresholds();
        // A degenerate history (all-zero magnitudes) falls back per component.
        if (c.lambda_fok > 0.0) t.lambda_fok = c.lambda_fok;
        if (c.lambda_confidence > 0.0) t.lambda_confidence = c.lambda_confidence;
        calibrated = true;
    } catch (const NoCalibrationHistory&) {
    }
    return t;
}

}  // namespace

RetrievalResult run_retrieval(const TagSet& query, KnowledgeStore& store, RetrievalEnvironment& env,
                              const RetrievalConfig& config, Rng& rng) {
    config.validate();
    if (query.empty()) throw std::invalid_argument("query must be non-empty");

    RetrievalResult result;
    auto& state = result.state;

    auto first_retrieved = store.retrieve_probabilistic(query, rng);
    const Thresholds base = initial_thresholds(store, config, result.calibrated);
    result.initial_thresholds = base;
    state.lambda_fok = base.lambda_fok;
    state.lambda_confidence = base.lambda_confidence;

    bool halted = false;
    for (int tau = 0; tau < config.max_cycles; ++tau) {
        state.cycle = tau;
        RetrievalStep step;
        step.cycle = tau;
        step.lambda_fok = state.lambda_fok;
        step.lambda_confidence = state.lambda_confidence;

        // MONITOR
        if (tau == 0) {
            step.retrieved = std::move(first_retrieved);
        } else {
            TagSet cue_query = query;
            if (state.answer) cue_query.insert(*state.answer);
            step.retrieved = store.retrieve_probabilistic(cue_query, rng);
        }
        const auto [match, mismatch] = env.probe(query, rng);
        state.fok = fok_dual(match, mismatch, state.fok);
        step.fok = state.fok;
        step.intensity = search_intensity(state.fok, state.lambda_fok);

        step.tuple.cycle = tau;
        step.tuple.fok = state.fok;
        step.tuple.experience = {clamp_unit(state.fok.magnitude()), std::nullopt, ExperienceMode::Feel};

        if (step.intensity == SearchIntensity::Terminate) {
            step.tuple.strategy_id = "terminate";
            step.tuple.outcome_quality = -1.0;
            step.tuple.confidence = 0.0;
            step.tuple.experience.secondary = 0.0;
            step.failed_attempts = state.failed_attempts;
            state.trace.push_back(step.tuple);
            result.trace.push_back(std::move(step));
            result.decision = RetrievalOutcome::Terminate;
            halted = true;
            break;
        }

        // GENERATE
        const bool intensive = step.intensity == SearchIntensity::Intensive;
        const std::size_t samples = env.standard_cue_samples() * (intensive ? 2 : 1);
        const Cue cue = env.attend(query, samples, rng);
        step.cue = cue;
        state.answer = env.search(cue);
        step.answer = state.answer;

        // VERIFY
        step.confidence = state.answer ? clamp_unit(env.assess(*state.answer, cue, store)) : 0.0;
        const auto decision =
            decide_output(state.answer, step.confidence, state.lambda_confidence, state.fok);
        step.decision = decision;

        step.tuple.strategy_id = intensive ? "attend_intensive" : "attend_standard";
        step.tuple.resources = static_cast<double>(samples);
        step.tuple.confidence = step.confidence;
        step.tuple.experience.secondary = step.confidence;

        if (decision == OutputDecision::Continue) {
            if (!state.answer || step.confidence < state.lambda_confidence) ++state.failed_attempts;
            const double beta = satisficing_factor(tau, state.failed_attempts, config.satisficing_rate);
            step.beta = beta;
            const Thresholds next =
                config.threshold_update == ThresholdUpdate::FromBase
                    ? update_thresholds(base.lambda_fok, base.lambda_confidence, beta)
                    : update_thresholds(state.lambda_fok, state.lambda_confidence, beta);
            step.tuple.outcome_quality =
                std::clamp(step.confidence - state.lambda_confidence, -1.0, 1.0);
            state.lambda_fok = next.lambda_fok;
            state.lambda_confidence = next.lambda_confidence;
        } else {
            step.tuple.outcome_quality = decision == OutputDecision::Output ? 1.0 : -1.0;
        }
        step.failed_attempts = state.failed_attempts;
        state.trace.push_back(step.tuple);
        result.trace.push_back(std::move(step));

        if (decision == OutputDecision::Output) {
            result.decision = RetrievalOutcome::Output;
            result.answer = state.answer;
            halted = true;
            break;
        }
        if (decision == OutputDecision::OutputNull) {
            result.decision = RetrievalOutcome::OutputNull;
            halted = true;
            break;
        }
    }
    if (!halted) result.decision = RetrievalOutcome::MaxCycles;
    result.cycles = static_cast<int>(result.trace.size());

    result.consolidated = store.consolidate(state.trace, rng);
    return result;
}

const char* to_string(SearchIntensity s) noexcept {
    switch (s) {
        case SearchIntensity::Intensive: return "intensive";
        case SearchIntensity::Standard: return "standard";
        case SearchIntensity::Terminate: return "terminate";
    }
    return "?";
}

const char* to_string(OutputDecision d) noexcept {
    switch (d) {
        case OutputDecision::Output: return "output";
        case OutputDecision::Continue: return "continue";
        case OutputDecision::OutputNull: return "output_null";
    }
    return "?";
}

const char* to_string(RetrievalOutcome o) noexcept {
    switch (o) {
        case RetrievalOutcome::Output: return "output";
        case RetrievalOutcome::OutputNull: return "output_null";
        case RetrievalOutcome::Terminate: return "terminate";
        case RetrievalOutcome::MaxCycles: return "max_cycles";
    }
    return "?";
}

const char* to_string(ThresholdUpdate u) noexcept {
    return u == ThresholdUpdate::FromBase ? "base" : "compound";
}

void to_json(nlohmann::json& j, const RetrievalStep& s) {
    j = nlohmann::json{
        {"cycle", s.cycle},
        {"retrieved", s.retrieved},
        {"fok", s.fok},
        {"lambda_fok", s.lambda_fok},
        {"lambda_confidence", s.lambda_confidence},
        {"intensity", to_string(s.intensity)},
        {"cue", s.cue ? nlohmann::json{{"samples", s.cue->samples}, {"matches", s.cue->matches}}
                      : nlohmann::json()},
        {"answer", s.answer ? nlohmann::json(*s.answer) : nlohmann::json()},
        {"confidence", s.confidence},
        {"decision", s.decision ? nlohmann::json(to_string(*s.decision)) : nlohmann::json()},
        {"failed_attempts", s.failed_attempts},
        {"beta", s.beta ? nlohmann::json(*s.beta) : nlohmann::json()},
        {"tuple", s.tuple}};
}

nlohmann::json result_json(const RetrievalResult& r) {
    return {{"decision", to_string(r.decision)},
            {"answer", r.answer ? nlohmann::json(*r.answer) : nlohmann::json()},
            {"cycles", r.cycles},
            {"calibrated", r.calibrated},
            {"final_thresholds",
             {{"lambda_fok", r.state.lambda_fok}, {"lambda_confidence", r.state.lambda_confidence}}},
            {"fok", r.state.fok}};
}

}  // namespace mgv
