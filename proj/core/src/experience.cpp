#include "mgv/experience.hpp"

#include <algorithm>
#include <stdexcept>

namespace mgv {

double clamp_unit(double x) noexcept { return std::clamp(x, 0.0, 1.0); }

ExperienceVector generate_experience(double raw_signal,
                                     std::optional<double> knowledge_assessment,
                                     double feel_prob, Rng& rng) {
    if (!(feel_prob >= 0.0 && feel_prob <= 1.0)) {
        throw std::invalid_argument("feel_prob must lie in [0,1]");
    }
    const bool feel = rng.bernoulli(feel_prob);
    if (feel || !knowledge_assessment) {
        return {clamp_unit(raw_signal), std::nullopt, ExperienceMode::Feel};
    }
    return {clamp_unit(*knowledge_assessment), std::nullopt, ExperienceMode::Assess};
}

FokCounters fok_dual(double match_evidence, double mismatch_evidence, FokCounters prior) {
    if (!(match_evidence >= 0.0) || !(mismatch_evidence >= 0.0)) {
        throw std::invalid_argument("FOK evidence must be nonnegative");
    }
    return {prior.plus + match_evidence, prior.minus + mismatch_evidence};
}

void to_json(nlohmann::json& j, const ExperienceMode& m) {
    j = (m == ExperienceMode::Feel) ? "feel" : "assess";
}

void from_json(const nlohmann::json& j, ExperienceMode& m) {
    const auto s = j.get<std::string>();
    if (s == "feel") m = ExperienceMode::Feel;
    else if (s == "assess") m = ExperienceMode::Assess;
    else throw std::invalid_argument("unknown experience mode: " + s);
}

void to_json(nlohmann::json& j, const ExperienceVector& v) {
    j = nlohmann::json{{"primary", v.primary},
                       {"secondary", v.secondary ? nlohmann::json(*v.secondary) : nlohmann::json()},
                       {"mode", v.mode}};
}

void from_json(const nlohmann::json& j, ExperienceVector& v) {
    v.primary = j.at("primary").get<double>();
    const auto& s = j.at("secondary");
    v.secondary = s.is_null() ? std::nullopt : std::optional<double>(s.get<double>());
    v.mode = j.at("mode").get<ExperienceMode>();
}

void to_json(nlohmann::json& j, const FokCounters& f) {
    j = nlohmann::json{{"plus", f.plus}, {"minus", f.minus}};
}

void from_json(const nlohmann::json& j, FokCounters& f) {
    f.plus = j.at("plus").get<double>();
    f.minus = j.at("minus").get<double>();
}

void to_json(nlohmann::json& j, const ExperienceTuple& t) {
    j = nlohmann::json{{"cycle", t.cycle},
                       {"experience", t.experience},
                       {"strategy_id", t.strategy_id},
                       {"resources", t.resources},
                       {"outcome_quality", t.outcome_quality},
                       {"fok", t.fok ? nlohmann::json(*t.fok) : nlohmann::json()},
                       {"confidence", t.confidence ? nlohmann::json(*t.confidence) : nlohmann::json()}};
}

void from_json(const nlohmann::json& j, ExperienceTuple& t) {
    t.cycle = j.at("cycle").get<int>();
    t.experience = j.at("experience").get<ExperienceVector>();
    t.strategy_id = j.at("strategy_id").get<std::string>();
    t.resources = j.at("resources").get<double>();
    t.outcome_quality = j.at("outcome_quality").get<double>();
    const auto& f = j.at("fok");
    t.fok = f.is_null() ? std::nullopt : std::optional<FokCounters>(f.get<FokCounters>());
    const auto& c = j.at("confidence");
    t.confidence = c.is_null() ? std::nullopt : std::optional<double>(c.get<double>());
}

}  // namespace mgv
