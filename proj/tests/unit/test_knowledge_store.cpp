#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "mgv/errors.hpp"
#include "mgv/knowledge_store.hpp"

using namespace mgv;

namespace {

KnowledgeItem strategy(const std::string& id, TagSet tags, int s = 0, int f = 0) {
    KnowledgeItem item;
    item.id = id;
    item.category = Category::Strategy;
    item.tags = std::move(tags);
    item.successes = s;
    item.failures = f;
    return item;
}

KnowledgeItem task_with_records(const std::string& id, std::vector<CalibrationRecord> records) {
    KnowledgeItem item;
    item.id = id;
    item.category = Category::Task;
    item.tags = {"q"};
    item.calibration_records = std::move(records);
    return item;
}

bool stm_subset_of_ltm(const KnowledgeStore& s) {
    return std::all_of(s.stm().begin(), s.stm().end(), [&](const auto& id) { return s.contains(id); });
}

ExperienceTuple tuple(const std::string& strategy_id, double outcome) {
    ExperienceTuple t;
    t.strategy_id = strategy_id;
    t.outcome_quality = outcome;
    return t;
}

}  // namespace

TEST_CASE("access_prob 1 copies every matching item") {
    KnowledgeStore store(1.0);
    store.add(strategy("a", {"x"}));
    store.add(strategy("b", {"x", "y"}));
    store.add(strategy("c", {"z"}));
    Rng rng(1);
    const auto added = store.retrieve_probabilistic({"x"}, rng);
    CHECK(added == std::vector<std::string>{"a", "b"});
    CHECK(store.stm() == std::set<std::string>{"a", "b"});

    SUBCASE("idempotent at access_prob 1") {
        CHECK(store.retrieve_probabilistic({"x"}, rng).empty());
        CHECK(store.stm().size() == 2);
    }
}

TEST_CASE("access_prob 0 leaves STM unchanged") {
    KnowledgeStore store(0.0);
    store.add(strategy("a", {"x"}));
    Rng rng(2);
    CHECK(store.retrieve_probabilistic({"x"}, rng).empty());
    CHECK(store.stm().empty());
}

TEST_CASE("no matching tags returns nothing and empty query is rejected") {
    KnowledgeStore store;
    store.add(strategy("a", {"x"}));
    Rng rng(3);
    CHECK(store.retrieve_probabilistic({"nope"}, rng).empty());
    CHECK_THROWS_AS(store.retrieve_probabilistic({}, rng), std::invalid_argument);
}

TEST_CASE("access_prob 0.5 over 1000 items matches a direct Bernoulli count") {
    KnowledgeStore store(0.5);
    for (int i = 0; i < 1000; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "i%04d", i);
        store.add(strategy(buf, {"t"}));
    }
    Rng rng(2024);
    Rng mirror(2024);
    const auto added = store.retrieve_probabilistic({"t"}, rng);
    std::size_t expected = 0;
    for (int i = 0; i < 1000; ++i) expected += mirror.uniform() < 0.5 ? 1 : 0;
    CHECK(added.size() == expected);
    CHECK(added.size() >= 400);
    CHECK(added.size() <= 600);
    CHECK(stm_subset_of_ltm(store));
}

TEST_CASE("STM grows monotonically across repeated retrievals") {
    KnowledgeStore store(0.3);
    for (int i = 0; i < 50; ++i) store.add(strategy("s" + std::to_string(i), {"t"}));
    Rng rng(5);
    std::size_t last = 0;
    for (int round = 0; round < 20; ++round) {
        store.retrieve_probabilistic({"t"}, rng);
        CHECK(store.stm().size() >= last);
        CHECK(stm_subset_of_ltm(store));
        last = store.stm().size();
    }
}

TEST_CASE("consolidate at encoding_rate 1 and 0") {
    std::vector<ExperienceTuple> tuples;
    for (int i = 0; i < 5; ++i) tuples.push_back(tuple("s", i % 2 ? 0.5 : -0.5));
    Rng rng(6);

    KnowledgeStore all(1.0, 1.0);
    CHECK(all.consolidate(tuples, rng) == 5);
    CHECK(all.ltm().size() == 5);

    KnowledgeStore none(1.0, 0.0);
    none.add(strategy("keep", {"t"}));
    CHECK(none.consolidate(tuples, rng) == 0);
    CHECK(none.ltm().size() == 1);
}

TEST_CASE("consolidate at encoding_rate 0.5 over 200 tuples") {
    std::vector<ExperienceTuple> tuples(200, tuple("s", 0.1));
    KnowledgeStore store(1.0, 0.5);
    Rng rng(77);
    Rng mirror(77);
    const auto n = store.consolidate(tuples, rng);
    std::size_t expected = 0;
    for (int i = 0; i < 200; ++i) expected += mirror.uniform() < 0.5 ? 1 : 0;
    CHECK(n == expected);
    CHECK(n >= 80);
    CHECK(n <= 120);
}

TEST_CASE("consolidate never mutates existing items and seeds counters from outcome") {
    KnowledgeStore store(1.0, 1.0);
    const auto original = strategy("s", {"t"}, 3, 1);
    store.add(original);
    ExperienceTuple with_conf = tuple("s", 0.4);
    with_conf.fok = FokCounters{0.2, 0.1};
    with_conf.confidence = 0.8;
    std::vector<ExperienceTuple> tuples{tuple("s", 0.5), tuple("s", -0.5), with_conf};
    Rng rng(8);
    CHECK(store.consolidate(tuples, rng) == 3);
    CHECK(*store.find("s") == original);

    int strategies = 0, tasks = 0;
    for (const auto& [id, item] : store.ltm()) {
        if (id == "s") continue;
        if (item.category == Category::Task) {
            ++tasks;
            REQUIRE(item.calibration_records.size() == 1);
            CHECK(item.calibration_records[0].fok_magnitude == doctest::Approx(0.3));
            CHECK(item.calibration_records[0].confidence == 0.8);
            CHECK(item.calibration_records[0].was_correct);
        } else {
            ++strategies;
            CHECK(item.successes + item.failures == 1);
        }
    }
    CHECK(strategies == 2);
    CHECK(tasks == 1);
}

TEST_CASE("update_knowledge revises, adds and prunes") {
    KnowledgeStore store(1.0, 1.0, 3);
    store.add(strategy("s", {"t"}, 1, 0));

    store.update_knowledge(tuple("s", 0.6));
    CHECK(store.find("s")->successes == 2);
    store.update_knowledge(tuple("s", -0.6));
    CHECK(store.find("s")->failures == 1);
    store.update_knowledge(tuple("s", 0.0));
    CHECK(store.find("s")->successes == 2);
    CHECK(store.find("s")->failures == 1);

    const auto before = store.ltm().size();
    store.update_knowledge(tuple("novel", 0.2));
    CHECK(store.ltm().size() == before + 1);
    CHECK(store.find("novel")->successes == 1);

    SUBCASE("prune margin 3 removes an item at 0 successes and 4 failures") {
        store.add(strategy("bad", {"t"}, 0, 3));
        Rng rng(1);
        store.retrieve_probabilistic({"t"}, rng);
        CHECK(store.stm().count("bad") == 1);
        store.update_knowledge(tuple("bad", -1.0));
        CHECK_FALSE(store.contains("bad"));
        CHECK(store.stm().count("bad") == 0);
        CHECK(stm_subset_of_ltm(store));
    }
    SUBCASE("exactly at the margin survives") {
        store.add(strategy("edge", {"t"}, 0, 2));
        store.update_knowledge(tuple("edge", -1.0));
        CHECK(store.contains("edge"));
    }
}

TEST_CASE("calibrate_thresholds takes medians over correct records") {
    Rng rng(1);
    SUBCASE("odd count") {
        KnowledgeStore store;
        store.add(task_with_records("k", {{0.2, 0.5, true}, {0.4, 0.6, true}, {0.6, 0.9, true}}));
        store.retrieve_probabilistic({"q"}, rng);
        const auto th = store.calibrate_thresholds();
        CHECK(th.lambda_fok == doctest::Approx(0.4).epsilon(1e-15));
        CHECK(th.lambda_confidence == doctest::Approx(0.6).epsilon(1e-15));
    }
    SUBCASE("singleton") {
        KnowledgeStore store;
        store.add(task_with_records("k", {{0.7, 0.9, true}}));
        store.retrieve_probabilistic({"q"}, rng);
        const auto th = store.calibrate_thresholds();
        CHECK(th.lambda_fok == 0.7);
        CHECK(th.lambda_confidence == 0.9);
    }
    SUBCASE("even count averages the middle pair, incorrect records ignored") {
        KnowledgeStore store;
        store.add(task_with_records("k", {{0.2, 0.4, true}, {0.6, 0.8, true}, {5.0, 0.0, false}}));
        store.retrieve_probabilistic({"q"}, rng);
        const auto th = store.calibrate_thresholds();
        CHECK(th.lambda_fok == doctest::Approx(0.4));
        CHECK(th.lambda_confidence == doctest::Approx(0.6));
    }
    SUBCASE("no correct records") {
        KnowledgeStore store;
        store.add(task_with_records("k", {{0.2, 0.4, false}}));
        store.retrieve_probabilistic({"q"}, rng);
        CHECK_THROWS_AS(store.calibrate_thresholds(), NoCalibrationHistory);
        KnowledgeStore empty;
        CHECK_THROWS_AS(empty.calibrate_thresholds(), NoCalibrationHistory);
    }
    SUBCASE("records outside STM do not count") {
        KnowledgeStore store;
        store.add(task_with_records("k", {{0.2, 0.4, true}}));
        CHECK_THROWS_AS(store.calibrate_thresholds(), NoCalibrationHistory);
    }
}

TEST_CASE("calibration is permutation invariant") {
    std::vector<CalibrationRecord> recs{
        {0.9, 0.1, true}, {0.3, 0.7, true}, {0.5, 0.2, true}, {0.1, 0.9, true}, {0.7, 0.4, true}};
    Rng shuffle(3);
    std::optional<Thresholds> first;
    for (int round = 0; round < 20; ++round) {
        for (std::size_t i = recs.size() - 1; i > 0; --i) std::swap(recs[i], recs[shuffle.index(i + 1)]);
        KnowledgeStore store;
        store.add(task_with_records("a", {recs[0], recs[1]}));
        store.add(task_with_records("b", {recs[2], recs[3], recs[4]}));
        Rng rng(1);
        store.retrieve_probabilistic({"q"}, rng);
        const auto th = store.calibrate_thresholds();
        if (!first) first = th;
        CHECK(th.lambda_fok == first->lambda_fok);
        CHECK(th.lambda_confidence == first->lambda_confidence);
    }
    CHECK(first->lambda_fok == 0.5);
}

TEST_CASE("median helper") {
    CHECK(median({3.0}) == 3.0);
    CHECK(median({4.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
}

TEST_CASE("smoothed success rate") {
    CHECK(strategy("a", {}, 0, 0).smoothed_success_rate() == 0.5);
    CHECK(strategy("a", {}, 3, 0).smoothed_success_rate() == 0.8);
}

TEST_CASE("store snapshot round trip is lossless") {
    KnowledgeStore store(0.75, 0.25, 4);
    store.add(strategy("s", {"t", "u"}, 2, 1));
    auto task = task_with_records("k", {{0.3, 0.6, true}, {0.1, 0.2, false}});
    task.features = {0.5, -1.0};
    store.add(task);
    Rng rng(1);
    store.retrieve_probabilistic({"q"}, rng);
    std::vector<ExperienceTuple> tuples{tuple("s", 0.4)};
    store.consolidate(tuples, rng);

    const auto j = store.to_json();
    CHECK(j.contains("access_prob"));
    CHECK(j.contains("encoding_rate"));
    CHECK(j.at("items").size() == store.ltm().size());
    const auto back = KnowledgeStore::from_json(nlohmann::json::parse(j.dump()));
    CHECK(back == store);
    CHECK(back.to_json() == j);
}
