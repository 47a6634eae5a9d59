#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mgv/flavell.hpp"
#include "mgv/retrieval.hpp"
#include "mgv/rng.hpp"

namespace mgv::harness {

/// Task environment with a fixed efficacy per strategy. Outcome quality is
/// efficacy + resource_gain * resources + Gaussian noise, clipped to [-1, 1].
struct SyntheticTaskSpec {
    std::map<std::string, double> efficacy;
    double default_efficacy = 0.0;
    double noise = 0.1;
    double resource_gain = 0.0;
    double completeness_prob = 1.0;
    double difficulty = 0.5;
};

class SyntheticTaskEnvironment final : public TaskEnvironment {
public:
    explicit SyntheticTaskEnvironment(SyntheticTaskSpec spec) : spec_(std::move(spec)) {}

    double initial_difficulty() const override { return spec_.difficulty; }
    ExecutionResult execute(const std::string& strategy_id, double resources, Rng& rng) override;
    /// Deterministic: scales the outcome by a per-kind weight.
    double meta_evaluate(double outcome, MetaStrategyKind kind) override;

private:
    SyntheticTaskSpec spec_;
};

/// Cue-statistics memory. Each sampled cue feature matches the stored
/// target with probability match_rate. The automatic search returns the
/// target (or, with no target, the lure) once `recognition_min` cue
/// features match; confidence is candidate_confidence * match fraction plus
/// stm_support for every STM item tagged with the answer.
struct CueEnvironmentSpec {
    std::optional<std::string> target;
    std::optional<std::string> lure;
    double match_rate = 0.7;
    std::size_t probe_samples = 4;
    std::size_t cue_samples = 4;
    std::size_t recognition_min = 1;
    double evidence_unit = 0.05;
    double candidate_confidence = 0.9;
    double stm_support = 0.0;
};

class CueStatisticsEnvironment final : public RetrievalEnvironment {
public:
    explicit CueStatisticsEnvironment(CueEnvironmentSpec spec) : spec_(std::move(spec)) {}

    std::pair<double, double> probe(const TagSet& query, Rng& rng) override;
    std::size_t standard_cue_samples() const override { return spec_.cue_samples; }
    Cue attend(const TagSet& query, std::size_t samples, Rng& rng) override;
    std::optional<std::string> search(const Cue& cue) const override;
    double assess(const std::string& answer, const Cue& cue,
                  const KnowledgeStore& store) const override;

    const CueEnvironmentSpec& spec() const noexcept { return spec_; }

private:
    CueEnvironmentSpec spec_;
};

/// Ground truth for one bandit arm: linear expected utility and time in the
/// features. Binary arms emit Bernoulli(clamp(<w_U, f>)) utilities.
struct ArmSpec {
    std::string name;
    std::vector<double> utility_weights;
    std::vector<double> time_weights;
    double utility_noise = 0.1;
    double time_noise = 0.0;
    bool binary = false;
};

enum class FeatureKind { Constant, Uniform };

struct BanditTaskSpec {
    std::vector<ArmSpec> arms;
    std::size_t feature_dim = 1;
    FeatureKind features = FeatureKind::Constant;  // Uniform: [1, U(0,1)...]
};

class BanditTask {
public:
    explicit BanditTask(BanditTaskSpec spec);

    Eigen::VectorXd draw_features(Rng& rng) const;
    /// (utility, elapsed time > 0)
    std::pair<double, double> execute(std::size_t arm, const Eigen::VectorXd& f, Rng& rng) const;
    double expected_utility(std::size_t arm, const Eigen::VectorXd& f) const;
    double expected_time(std::size_t arm, const Eigen::VectorXd& f) const;
    double expected_voc(std::size_t arm, const Eigen::VectorXd& f, double gamma) const;
    std::size_t arms() const noexcept { return spec_.arms.size(); }
    const BanditTaskSpec& spec() const noexcept { return spec_; }

private:
    BanditTaskSpec spec_;
};

/// Minimum elapsed time reported by BanditTask::execute.
inline constexpr double kMinElapsed = 1e-3;

}  // namespace mgv::harness
