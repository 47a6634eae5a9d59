#include "mgv/harness/environments.hpp"

#include <algorithm>
#include <stdexcept>

#include "mgv/errors.hpp"

namespace mgv::harness {

ExecutionResult SyntheticTaskEnvironment::execute(const std::string& strategy_id, double resources,
                                                  Rng& rng) {
    const auto it = spec_.efficacy.find(strategy_id);
    const double efficacy = it == spec_.efficacy.end() ? spec_.default_efficacy : it->second;
    const double noise = rng.normal(0.0, spec_.noise);
    const bool complete = rng.bernoulli(spec_.completeness_prob);
    const double quality = efficacy + spec_.resource_gain * resources + noise;
    return {std::clamp(quality, -1.0, 1.0), complete ? 1.0 : 0.5};
}

double SyntheticTaskEnvironment::meta_evaluate(double outcome, MetaStrategyKind kind) {
    switch (kind) {
        case MetaStrategyKind::Coherence: return 0.8 * outcome;
        case MetaStrategyKind::Plausibility: return outcome;
        case MetaStrategyKind::Consistency: return 0.9 * outcome;
        case MetaStrategyKind::GoalConduciveness: return outcome;
    }
    return outcome;
}

std::pair<double, double> CueStatisticsEnvironment::probe(const TagSet& /*query*/, Rng& rng) {
    std::size_t matches = 0;
    for (std::size_t i = 0; i < spec_.probe_samples; ++i) {
        if (rng.bernoulli(spec_.match_rate)) ++matches;
    }
    const double unit = spec_.evidence_unit;
    return {unit * static_cast<double>(matches),
            unit * static_cast<double>(spec_.probe_samples - matches)};
}

Cue CueStatisticsEnvironment::attend(const TagSet& /*query*/, std::size_t samples, Rng& rng) {
    Cue cue{samples, 0};
    for (std::size_t i = 0; i < samples; ++i) {
        if (rng.bernoulli(spec_.match_rate)) ++cue.matches;
    }
    return cue;
}

std::optional<std::string> CueStatisticsEnvironment::search(const Cue& cue) const {
    if (cue.matches < spec_.recognition_min || cue.matches == 0) return std::nullopt;
    return spec_.target ? spec_.target : spec_.lure;
}

double CueStatisticsEnvironment::assess(const std::string& answer, const Cue& cue,
                                        const KnowledgeStore& store) const {
    double support = 0.0;
    for (const auto& id : store.stm()) {
        if (store.find(id)->tags.count(answer)) support += spec_.stm_support;
    }
    return clamp_unit(spec_.candidate_confidence * cue.match_fraction() + support);
}

BanditTask::BanditTask(BanditTaskSpec spec) : spec_(std::move(spec)) {
    if (spec_.arms.empty()) throw std::invalid_argument("bandit task needs at least one arm");
    if (spec_.feature_dim == 0) throw std::invalid_argument("feature_dim must be >= 1");
    for (const auto& arm : spec_.arms) {
        if (arm.utility_weights.size() != spec_.feature_dim ||
            arm.time_weights.size() != spec_.feature_dim) {
            throw DimensionMismatch("arm '" + arm.name + "' weights do not match feature_dim");
        }
    }
}

Eigen::VectorXd BanditTask::draw_features(Rng& rng) const {
    Eigen::VectorXd f = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(spec_.feature_dim));
    if (spec_.features == FeatureKind::Uniform) {
        for (Eigen::Index i = 1; i < f.size(); ++i) f(i) = rng.uniform();
    }
    return f;
}

namespace {

double dot(const std::vector<double>& w, const Eigen::VectorXd& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * f(static_cast<Eigen::Index>(i));
    return s;
}

}  // namespace

double BanditTask::expected_utility(std::size_t arm, const Eigen::VectorXd& f) const {
    const auto& a = spec_.arms.at(arm);
    const double u = dot(a.utility_weights, f);
    return a.binary ? std::clamp(u, 0.0, 1.0) : u;
}

double BanditTask::expected_time(std::size_t arm, const Eigen::VectorXd& f) const {
    return std::max(kMinElapsed, dot(spec_.arms.at(arm).time_weights, f));
}

double BanditTask::expected_voc(std::size_t arm, const Eigen::VectorXd& f, double gamma) const {
    return expected_utility(arm, f) - gamma * expected_time(arm, f);
}

std::pair<double, double> BanditTask::execute(std::size_t arm, const Eigen::VectorXd& f,
                                              Rng& rng) const {
    const auto& a = spec_.arms.at(arm);
    double utility;
    if (a.binary) {
        utility = rng.bernoulli(expected_utility(arm, f)) ? 1.0 : 0.0;
    } else {
        utility = expected_utility(arm, f) + rng.normal(0.0, a.utility_noise);
    }
    const double elapsed =
        std::max(kMinElapsed, expected_time(arm, f) + rng.normal(0.0, a.time_noise));
    return {utility, elapsed};
}

}  // namespace mgv::harness
