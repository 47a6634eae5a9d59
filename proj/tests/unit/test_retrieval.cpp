#include <doctest.h>

#include <cmath>

#include "mgv/harness/environments.hpp"
#include "mgv/retrieval.hpp"

using namespace mgv;

namespace {

/// Fixed evidence per probe and a fixed cue; search answers when any cue
/// feature matches.
class FixedEnv : public RetrievalEnvironment {
public:
    FixedEnv(double plus, double minus, std::size_t matches, std::optional<std::string> answer,
             double confidence)
        : plus_(plus), minus_(minus), matches_(matches), answer_(std::move(answer)),
          confidence_(confidence) {}

    std::pair<double, double> probe(const TagSet&, Rng&) override { return {plus_, minus_}; }
    std::size_t standard_cue_samples() const override { return 4; }
    Cue attend(const TagSet&, std::size_t n, Rng&) override {
        ++attends;
        last_samples = n;
        return {n, std::min(n, matches_)};
    }
    std::optional<std::string> search(const Cue& cue) const override {
        return cue.matches > 0 ? answer_ : std::nullopt;
    }
    double assess(const std::string&, const Cue&, const KnowledgeStore&) const override {
        return confidence_;
    }

    int attends = 0;
    std::size_t last_samples = 0;

private:
    double plus_, minus_;
    std::size_t matches_;
    std::optional<std::string> answer_;
    double confidence_;
};

}  // namespace

TEST_CASE("search intensity cases") {
    CHECK(search_intensity({0.05, 0.04}, 0.5) == SearchIntensity::Intensive);
    CHECK(search_intensity({0.6, 0.2}, 0.5) == SearchIntensity::Standard);
    CHECK(search_intensity({0.2, 0.6}, 0.5) == SearchIntensity::Terminate);
    CHECK(search_intensity({0.4, 0.4}, 0.5) == SearchIntensity::Terminate);
    CHECK_THROWS_AS(search_intensity({0.1, 0.1}, 0.0), std::invalid_argument);
}

TEST_CASE("search intensity boundary: magnitude exactly at lambda is not intensive") {
    CHECK(search_intensity({0.25, 0.25}, 0.5) == SearchIntensity::Terminate);
    CHECK(search_intensity({0.3, 0.2}, 0.5) == SearchIntensity::Standard);
}

TEST_CASE("satisficing factor") {
    CHECK(satisficing_factor(7, 3, 0.0) == 1.0);
    CHECK(satisficing_factor(0, 0, 0.4) == 1.0);
    CHECK(std::fabs(satisficing_factor(2, 1, 0.1) - 0.7408182206817179) < 1e-15);
}

TEST_CASE("threshold updates decay the base") {
    const auto same = update_thresholds(0.4, 0.6, 1.0);
    CHECK(same.lambda_fok == 0.4);
    CHECK(same.lambda_confidence == 0.6);
    const auto half = update_thresholds(0.4, 0.6, 0.5);
    CHECK(half.lambda_fok == 0.2);
    CHECK(half.lambda_confidence == 0.3);
    CHECK_THROWS_AS(update_thresholds(0.4, 0.6, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(update_thresholds(0.4, 0.6, 1.5), std::invalid_argument);
    double prev = 1.0;
    for (double beta = 1.0; beta > 0.05; beta *= 0.8) {
        const auto t = update_thresholds(0.4, 0.6, beta);
        CHECK(t.lambda_fok <= prev);
        prev = t.lambda_fok;
    }
}

TEST_CASE("output decision") {
    CHECK(decide_output("x", 0.8, 0.5, {}) == OutputDecision::Output);
    CHECK(decide_output("x", 0.5, 0.5, {}) == OutputDecision::Output);
    CHECK(decide_output("x", 0.4, 0.5, {}) == OutputDecision::Continue);
    CHECK(decide_output(std::nullopt, 0.0, 0.5, {0.6, 0.2}) == OutputDecision::Continue);
    CHECK(decide_output(std::nullopt, 0.0, 0.5, {0.2, 0.6}) == OutputDecision::OutputNull);
    CHECK(decide_output(std::nullopt, 0.0, 0.5, {0.3, 0.3}) == OutputDecision::OutputNull);
}

TEST_CASE("perfect target is output at cycle 0") {
    FixedEnv env(0.6, 0.0, 4, "answer", 1.0);
    KnowledgeStore store;
    Rng rng(1);
    const auto r = run_retrieval({"q"}, store, env, {}, rng);
    CHECK(r.decision == RetrievalOutcome::Output);
    CHECK(r.answer == "answer");
    CHECK(r.trace.size() == 1);
    CHECK(r.cycles == 1);
    CHECK_FALSE(r.calibrated);
}

TEST_CASE("absent target with pure mismatch cues ends in an omission") {
    // Counters read (0, 0.1): too weak for standard search, so attention
    // doubles, nothing matches and minus dominates.
    FixedEnv env(0.0, 0.1, 0, std::nullopt, 0.0);
    KnowledgeStore store;
    Rng rng(2);
    const auto r = run_retrieval({"q"}, store, env, {}, rng);
    CHECK(r.decision == RetrievalOutcome::OutputNull);
    CHECK_FALSE(r.answer.has_value());
    REQUIRE(r.trace.size() == 1);
    CHECK(r.trace[0].fok.minus == doctest::Approx(0.1));
    CHECK(r.trace[0].intensity == SearchIntensity::Intensive);
    CHECK(env.last_samples == 8);
}

TEST_CASE("strong negative evidence terminates before searching") {
    FixedEnv env(0.1, 0.9, 0, std::nullopt, 0.0);
    KnowledgeStore store;
    Rng rng(3);
    const auto r = run_retrieval({"q"}, store, env, {}, rng);
    CHECK(r.decision == RetrievalOutcome::Terminate);
    CHECK(env.attends == 0);
    CHECK(r.trace.size() == 1);
}

TEST_CASE("large satisficing rate accepts a mediocre answer by cycle 1") {
    // confidence 0.4 < lambda 0.7 at cycle 0; one failure gives
    // beta = exp(-5 (0 + 1)) so lambda_conf drops to 0.7 e^-5 ~ 0.0047.
    FixedEnv env(0.6, 0.0, 2, "meh", 0.4);
    KnowledgeStore store;
    RetrievalConfig cfg;
    cfg.satisficing_rate = 5.0;
    Rng rng(4);
    const auto r = run_retrieval({"q"}, store, env, cfg, rng);
    CHECK(r.decision == RetrievalOutcome::Output);
    CHECK(r.answer == "meh");
    REQUIRE(r.trace.size() == 2);
    CHECK(r.trace[1].lambda_confidence == doctest::Approx(0.7 * std::exp(-5.0)).epsilon(1e-12));
}

TEST_CASE("zero satisficing rate with a mediocre answer runs to max_cycles") {
    FixedEnv env(0.6, 0.0, 2, "meh", 0.4);
    KnowledgeStore store;
    RetrievalConfig cfg;
    cfg.satisficing_rate = 0.0;
    cfg.max_cycles = 6;
    Rng rng(5);
    const auto r = run_retrieval({"q"}, store, env, cfg, rng);
    CHECK(r.decision == RetrievalOutcome::MaxCycles);
    CHECK(r.trace.size() == 6);
    for (const auto& s : r.trace) CHECK(s.lambda_confidence == 0.7);
}

TEST_CASE("thresholds follow the base times beta and never rise") {
    for (double alpha : {0.0, 0.05, 0.3}) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            harness::CueEnvironmentSpec spec;
            spec.target = "t";
            spec.match_rate = 0.5;
            spec.candidate_confidence = 0.5;
            harness::CueStatisticsEnvironment env(spec);
            KnowledgeStore store;
            RetrievalConfig cfg;
            cfg.satisficing_rate = alpha;
            Rng rng(seed);
            const auto r = run_retrieval({"q"}, store, env, cfg, rng);
            double prev_fok = r.initial_thresholds.lambda_fok;
            double prev_conf = r.initial_thresholds.lambda_confidence;
            for (std::size_t i = 0; i < r.trace.size(); ++i) {
                const auto& s = r.trace[i];
                CHECK(s.lambda_fok <= prev_fok);
                CHECK(s.lambda_confidence <= prev_conf);
                CHECK(s.failed_attempts <= s.cycle + 1);
                if (i > 0) {
                    const auto& p = r.trace[i - 1];
                    const double beta = std::exp(-alpha * (p.cycle + p.failed_attempts));
                    CHECK(std::fabs(s.lambda_fok - r.initial_thresholds.lambda_fok * beta) < 1e-12);
                }
                prev_fok = s.lambda_fok;
                prev_conf = s.lambda_confidence;
            }
            CHECK(r.trace.size() <= static_cast<std::size_t>(cfg.max_cycles));
        }
    }
}

TEST_CASE("compound mode multiplies on the previous thresholds") {
    FixedEnv env(0.6, 0.0, 2, "meh", 0.0);
    KnowledgeStore store;
    RetrievalConfig cfg;
    cfg.satisficing_rate = 0.1;
    cfg.max_cycles = 4;
    cfg.threshold_update = ThresholdUpdate::Compound;
    Rng rng(6);
    const auto r = run_retrieval({"q"}, store, env, cfg, rng);
    REQUIRE(r.trace.size() == 4);
    double expect = cfg.default_lambda_confidence;
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
        expect *= *r.trace[i - 1].beta;
        CHECK(r.trace[i].lambda_confidence == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("calibrated thresholds come from STM history") {
    KnowledgeStore store;
    KnowledgeItem k;
    k.id = "hist";
    k.category = Category::Task;
    k.tags = {"q"};
    k.calibration_records = {{0.3, 0.6, true}, {0.5, 0.8, true}};
    store.add(k);
    FixedEnv env(0.6, 0.0, 4, "a", 0.75);
    Rng rng(7);
    const auto r = run_retrieval({"q"}, store, env, {}, rng);
    CHECK(r.calibrated);
    CHECK(r.initial_thresholds.lambda_fok == doctest::Approx(0.4));
    CHECK(r.initial_thresholds.lambda_confidence == doctest::Approx(0.7));
    CHECK(r.decision == RetrievalOutcome::Output);
}

TEST_CASE("deterministic search gives the same answer for the same cue") {
    harness::CueEnvironmentSpec spec;
    spec.target = "canberra";
    const harness::CueStatisticsEnvironment env(spec);
    const Cue cue{4, 3};
    CHECK(env.search(cue) == env.search(cue));
    CHECK(env.search(Cue{4, 0}) == std::nullopt);
}

TEST_CASE("output implies confidence at or above the current threshold") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        harness::CueEnvironmentSpec spec;
        spec.target = "t";
        spec.match_rate = 0.6;
        harness::CueStatisticsEnvironment env(spec);
        KnowledgeStore store;
        Rng rng(seed);
        const auto r = run_retrieval({"q"}, store, env, {}, rng);
        for (const auto& s : r.trace) {
            if (s.decision == OutputDecision::Output) CHECK(s.confidence >= s.lambda_confidence);
        }
        for (std::size_t i = 1; i < r.trace.size(); ++i) {
            CHECK(r.trace[i].fok.plus >= r.trace[i - 1].fok.plus);
            CHECK(r.trace[i].fok.minus >= r.trace[i - 1].fok.minus);
        }
    }
}
