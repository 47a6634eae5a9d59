#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "mgv/rng.hpp"

namespace mgv {

enum class ExperienceMode { Feel, Assess };

/// A metacognitive experience. `primary` holds EOL, FOK magnitude or
/// difficulty; `secondary` (JOL or evaluative judgement) stays empty until
/// verification fills it. Components live in [0, 1].
struct ExperienceVector {
    double primary = 0.0;
    std::optional<double> secondary;
    ExperienceMode mode = ExperienceMode::Feel;
};

/// Dual feeling-of-knowing counters: evidence for presence (plus) and for
/// absence (minus) of the target.
struct FokCounters {
    double plus = 0.0;
    double minus = 0.0;

    double magnitude() const noexcept { return plus + minus; }  // L1 norm
    bool operator==(const FokCounters&) const = default;
};

/// One cycle's experience record (the Phi / Omega trace entries).
struct ExperienceTuple {
    int cycle = 0;
    ExperienceVector experience;
    std::string strategy_id;
    double resources = 0.0;
    double outcome_quality = 0.0;
    std::optional<FokCounters> fok;
    std::optional<double> confidence;
};

double clamp_unit(double x) noexcept;

/// feel (+) assess: one Bernoulli(feel_prob) draw per call picks the branch.
/// When the assessment is absent the call falls back to the feeling.
ExperienceVector generate_experience(double raw_signal,
                                     std::optional<double> knowledge_assessment,
                                     double feel_prob, Rng& rng);

/// Accumulate match/mismatch evidence into the counters. Evidence must be
/// nonnegative so the counters never decrease.
FokCounters fok_dual(double match_evidence, double mismatch_evidence, FokCounters prior);

void to_json(nlohmann::json& j, const ExperienceMode& m);
void from_json(const nlohmann::json& j, ExperienceMode& m);
void to_json(nlohmann::json& j, const ExperienceVector& v);
void from_json(const nlohmann::json& j, ExperienceVector& v);
void to_json(nlohmann::json& j, const FokCounters& f);
void from_json(const nlohmann::json& j, FokCounters& f);
void to_json(nlohmann::json& j, const ExperienceTuple& t);
void from_json(const nlohmann::json& j, ExperienceTuple& t);

}  // namespace mgv
