#include <doctest.h>

#include <stdexcept>

#include "mgv/experience.hpp"
#include "mgv/rng.hpp"

using namespace mgv;

TEST_CASE("feel_prob 1 always returns the raw feeling") {
    Rng rng(1);
    for (int i = 0; i < 200; ++i) {
        const auto v = generate_experience(0.3, 0.9, 1.0, rng);
        CHECK(v.mode == ExperienceMode::Feel);
        CHECK(v.primary == 0.3);
        CHECK_FALSE(v.secondary.has_value());
    }
}

TEST_CASE("feel_prob 0 returns the assessment when present") {
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
        const auto v = generate_experience(0.3, 0.9, 0.0, rng);
        CHECK(v.mode == ExperienceMode::Assess);
        CHECK(v.primary == 0.9);
    }
}

TEST_CASE("absent assessment falls back to feel") {
    Rng rng(3);
    const auto v = generate_experience(0.4, std::nullopt, 0.0, rng);
    CHECK(v.mode == ExperienceMode::Feel);
    CHECK(v.primary == 0.4);
}

TEST_CASE("feel fraction over 10000 draws stays in [0.47, 0.53]") {
    Rng rng(42);
    Rng mirror(42);
    int feel = 0, expected = 0;
    for (int i = 0; i < 10000; ++i) {
        if (generate_experience(0.2, 0.8, 0.5, rng).mode == ExperienceMode::Feel) ++feel;
        if (mirror.uniform() < 0.5) ++expected;
    }
    CHECK(feel == expected);
    CHECK(feel >= 4700);
    CHECK(feel <= 5300);
}

TEST_CASE("experience output is exactly one of its inputs, never a blend") {
    Rng rng(9);
    Rng values(10);
    for (int i = 0; i < 2000; ++i) {
        const double raw = values.uniform();
        const double assess = values.uniform();
        const double p = values.uniform();
        const auto v = generate_experience(raw, assess, p, rng);
        CHECK((v.primary == raw || v.primary == assess));
        CHECK(v.primary == (v.mode == ExperienceMode::Feel ? raw : assess));
    }
}

TEST_CASE("experience components are clamped to the unit interval") {
    Rng rng(4);
    CHECK(generate_experience(1.7, std::nullopt, 1.0, rng).primary == 1.0);
    CHECK(generate_experience(-0.2, std::nullopt, 1.0, rng).primary == 0.0);
    CHECK(generate_experience(0.5, 3.0, 0.0, rng).primary == 1.0);
}

TEST_CASE("feel_prob outside [0,1] is rejected") {
    Rng rng(5);
    CHECK_THROWS_AS(generate_experience(0.5, 0.5, 1.5, rng), std::invalid_argument);
    CHECK_THROWS_AS(generate_experience(0.5, 0.5, -0.1, rng), std::invalid_argument);
}

TEST_CASE("one draw per call regardless of branch") {
    Rng a(77), b(77);
    generate_experience(0.1, std::nullopt, 0.3, a);
    b.uniform();
    CHECK(a.uniform() == b.uniform());
}

TEST_CASE("fok_dual accumulates both counters") {
    const auto f = fok_dual(0.3, 0.1, {});
    CHECK(f.plus == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(f.minus == doctest::Approx(0.1).epsilon(1e-15));

    const FokCounters prior{0.3, 0.1};
    CHECK(fok_dual(0.0, 0.0, prior) == prior);

    const auto g = fok_dual(0.2, 0.5, prior);
    CHECK(g.plus == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g.minus == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(g.minus > g.plus);
    CHECK(g.magnitude() == doctest::Approx(1.1).epsilon(1e-15));
}

TEST_CASE("fok counters never decrease and magnitude is the L1 norm") {
    Rng rng(11);
    FokCounters f;
    for (int i = 0; i < 500; ++i) {
        const auto next = fok_dual(rng.uniform(), rng.uniform(), f);
        CHECK(next.plus >= f.plus);
        CHECK(next.minus >= f.minus);
        CHECK(next.magnitude() == next.plus + next.minus);
        f = next;
    }
    CHECK_THROWS_AS(fok_dual(-0.1, 0.0, f), std::invalid_argument);
}

TEST_CASE("experience tuple json round trip") {
    ExperienceTuple t;
    t.cycle = 3;
    t.experience = {0.25, 0.75, ExperienceMode::Assess};
    t.strategy_id = "chunking";
    t.resources = 1.5;
    t.outcome_quality = -0.25;
    t.fok = FokCounters{0.5, 0.125};
    t.confidence = 0.625;
    const nlohmann::json j = t;
    const auto back = j.get<ExperienceTuple>();
    CHECK(back.cycle == 3);
    CHECK(back.experience.mode == ExperienceMode::Assess);
    CHECK(*back.experience.secondary == 0.75);
    CHECK(back.strategy_id == "chunking");
    CHECK(*back.fok == *t.fok);
    CHECK(*back.confidence == 0.625);
    CHECK(nlohmann::json(back) == j);

    ExperienceTuple bare;
    const nlohmann::json jb = bare;
    CHECK(jb.at("fok").is_null());
    CHECK(jb.at("confidence").is_null());
    CHECK(jb.at("experience").at("secondary").is_null());
}
