#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgv/experience.hpp"
#include "mgv/knowledge_store.hpp"
#include "mgv/rng.hpp"

namespace mgv {

enum class SearchIntensity { Intensive, Standard, Terminate };
enum class OutputDecision { Output, Continue, OutputNull };

/// How satisficing decay is applied to the thresholds.
///   FromBase: lambda(t+1) = lambda(0) * beta(t)   (default)
///   Compound: lambda(t+1) = lambda(t) * beta(t)
enum class ThresholdUpdate { FromBase, Compound };

struct RetrievalConfig {
    double satisficing_rate = 0.1;
    double default_lambda_fok = 0.5;
    double default_lambda_confidence = 0.7;
    int max_cycles = 20;
    ThresholdUpdate threshold_update = ThresholdUpdate::FromBase;

    void validate() const;
};

/// Cue samples gathered by attention: how many cue features were sampled
/// and how many matched the stored trace.
struct Cue {
    std::size_t samples = 0;
    std::size_t matches = 0;

    double match_fraction() const noexcept {
        return samples == 0 ? 0.0 : static_cast<double>(matches) / static_cast<double>(samples);
    }
    bool operator==(const Cue&) const = default;
};

/// Object-level memory the retrieval loop monitors and controls.
class RetrievalEnvironment {
public:
    virtual ~RetrievalEnvironment() = default;

    /// Match / mismatch evidence for the FOK counters, both >= 0.
    virtual std::pair<double, double> probe(const TagSet& query, Rng& rng) = 0;
    virtual std::size_t standard_cue_samples() const = 0;
    virtual Cue attend(const TagSet& query, std::size_t samples, Rng& rng) = 0;
    /// Automatic pattern-match search. Must be a pure function of the cue.
    virtual std::optional<std::string> search(const Cue& cue) const = 0;
    /// Confidence in [0, 1] for a candidate answer.
    virtual double assess(const std::string& answer, const Cue& cue,
                          const KnowledgeStore& store) const = 0;
};

SearchIntensity search_intensity(const FokCounters& fok, double lambda_fok);

/// exp(-rate * (cycle + failed_attempts)).
double satisficing_factor(int cycle, int failed_attempts, double rate);

/// (base_fok * beta, base_confidence * beta).
Thresholds update_thresholds(double base_lambda_fok, double base_lambda_confidence, double beta);

OutputDecision decide_output(const std::optional<std::string>& answer, double confidence,
                             double lambda_confidence, const FokCounters& fok);

struct RetrievalState {
    int cycle = 0;
    double lambda_fok = 0.0;
    double lambda_confidence = 0.0;
    FokCounters fok;
    int failed_attempts = 0;
    std::vector<ExperienceTuple> trace;
    std::optional<std::string> answer;
};

struct RetrievalStep {
    int cycle = 0;
    std::vector<std::string> retrieved;
    FokCounters fok;
    double lambda_fok = 0.0;          // thresholds in force during this cycle
    double lambda_confidence = 0.0;
    SearchIntensity intensity = SearchIntensity::Standard;
    std::optional<Cue> cue;
    std::optional<std::string> answer;
    double confidence = 0.0;
    std::optional<OutputDecision> decision;
    int failed_attempts = 0;          // after this cycle
    std::optional<double> beta;       // set on Continue
    ExperienceTuple tuple;
};

enum class RetrievalOutcome { Output, OutputNull, Terminate, MaxCycles };

struct RetrievalResult {
    RetrievalOutcome decision = RetrievalOutcome::MaxCycles;
    std::optional<std::string> answer;
    int cycles = 0;
    bool calibrated = false;
    Thresholds initial_thresholds;
    RetrievalState state;
    std::vector<RetrievalStep> trace;
    std::size_t consolidated = 0;
};

RetrievalResult run_retrieval(const TagSet& query, KnowledgeStore& store, RetrievalEnvironment& env,
                              const RetrievalConfig& config, Rng& rng);

const char* to_string(SearchIntensity s) noexcept;
const char* to_string(OutputDecision d) noexcept;
const char* to_string(RetrievalOutcome o) noexcept;
const char* to_string(ThresholdUpdate u) noexcept;

void to_json(nlohmann::json& j, const RetrievalStep& s);
nlohmann::json result_json(const RetrievalResult& r);

}  // namespace mgv
