#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mgv/errors.hpp"
#include "mgv/harness/config.hpp"
#include "mgv/harness/report.hpp"
#include "mgv/harness/runner.hpp"
#include "mgv/harness/trace.hpp"

using namespace mgv;
using namespace mgv::harness;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "mgv_test_harness" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json minimal_acquire() {
    return {{"mode", "acquire"},
            {"seed", 3},
            {"params", {{"target_performance", 0.8}, {"items", {{{"id", 1}, {"latent_difficulty", 0.4}}}}}}};
}

std::string field_of(const json& doc) {
    try {
        parse_config(doc);
    } catch (const ValidationError& e) {
        return e.field();
    }
    return "";
}

json bandit_doc(std::uint64_t seed, const std::string& out) {
    return {{"mode", "bandit"},
            {"seed", seed},
            {"output", out},
            {"params",
             {{"arms",
               {{{"name", "a"}, {"utility_weights", {0.8}}, {"binary", true}},
                {{"name", "b"}, {"utility_weights", {0.2}}, {"binary", true}}}},
              {"episodes", 50}}}};
}

std::optional<Mode> bare_mode(const std::string& name) {
    if (name == "bandit") return Mode::Bandit;
    if (name == "tree") return Mode::Plan;
    return std::nullopt;
}

}  // namespace

TEST_CASE("minimal config is filled with defaults") {
    const auto cfg = parse_config(minimal_acquire());
    CHECK(cfg.mode == Mode::Acquire);
    CHECK(cfg.seed == 3);
    const auto& a = std::get<AcquireParams>(cfg.params).acquisition;
    CHECK(a.feel_prob == 0.5);
    CHECK(a.epsilon == 1e-6);
    CHECK(a.items.size() == 1);
    CHECK(a.items[0].mastery == 0.0);
}

TEST_CASE("invalid fields are named") {
    auto doc = json{{"mode", "retrieve"}, {"seed", 1}, {"params", {{"query", {"x"}}, {"satisficing_rate", -0.1}}}};
    CHECK(field_of(doc) == "satisficing_rate");

    doc = minimal_acquire();
    doc["params"]["bogus"] = 1;
    CHECK(field_of(doc) == "bogus");

    doc = minimal_acquire();
    doc["mode"] = "dance";
    CHECK(field_of(doc) == "mode");

    doc = minimal_acquire();
    doc.erase("seed");
    CHECK(field_of(doc) == "seed");
    CHECK(parse_config(doc, {std::nullopt, 5, std::nullopt}).seed == 5);

    doc = minimal_acquire();
    doc["params"]["items"][0]["latent_difficulty"] = "hard";
    CHECK(field_of(doc).rfind("items", 0) == 0);

    doc = minimal_acquire();
    doc["params"]["target_performance"] = 0.95;
    doc["params"]["retention_discount"] = 0.2;
    doc["params"]["max_cycles"] = 0;
    CHECK(field_of(doc) == "max_cycles");
}

TEST_CASE("command line overrides win") {
    const auto cfg = parse_config(minimal_acquire(), {std::nullopt, 99, std::string("x.jsonl")});
    CHECK(cfg.seed == 99);
    CHECK(cfg.output == "x.jsonl");
    CHECK_THROWS_AS(parse_config(minimal_acquire(), {Mode::Bandit, std::nullopt, std::nullopt}), ValidationError);
}

TEST_CASE("config files round trip") {
    const auto dir = scratch("roundtrip");
    for (const char* name : {"flavell", "acquire", "retrieve", "recall"}) {
        const auto cfg = load_config(fs::path(MGV_CONFIG_DIR) / (std::string(name) + ".json"), {std::nullopt, 1, std::nullopt});
        const auto path = dir / (std::string(name) + ".json");
        save_config(cfg, path);
        CHECK(config_to_json(load_config(path)) == config_to_json(cfg));
    }
    // Bare parameter blocks take their mode from the command line.
    for (auto [name, mode] : {std::pair{"bandit", Mode::Bandit}, std::pair{"tree", Mode::Plan}}) {
        const auto cfg = load_config(fs::path(MGV_CONFIG_DIR) / (std::string(name) + ".json"), {mode, 1, std::nullopt});
        save_config(cfg, dir / (std::string(name) + ".json"));
        CHECK(config_to_json(load_config(dir / (std::string(name) + ".json"))) == config_to_json(cfg));
    }
}

TEST_CASE("missing and malformed files") {
    const auto dir = scratch("files");
    CHECK_THROWS_AS(load_config(dir / "nope.json"), MissingFile);
    std::ofstream(dir / "bad.json") << "{ not json";
    CHECK_THROWS_AS(load_config(dir / "bad.json"), ParseError);
}

TEST_CASE("same seed gives byte-identical traces") {
    const auto dir = scratch("determinism");
    for (const char* name : {"flavell", "acquire", "retrieve", "bandit", "tree", "recall"}) {
        std::string first;
        for (int rep = 0; rep < 2; ++rep) {
            auto cfg = load_config(fs::path(MGV_CONFIG_DIR) / (std::string(name) + ".json"),
                                   {bare_mode(name), 4,
                                    (dir / (std::string(name) + std::to_string(rep) + ".jsonl")).string()});
            if (cfg.mode == Mode::RecallMdp) std::get<RecallParams>(cfg.params).episodes = 50;
            run(cfg, {2, {}, {}});
            const auto text = slurp(cfg.output);
            CHECK(!text.empty());
            if (rep == 0) first = text;
            else CHECK(text == first);
        }
    }
}

TEST_CASE("repeats use different streams") {
    auto cfg = parse_config(bandit_doc(1, "unused.jsonl"));
    const auto a = execute(cfg, 0), b = execute(cfg, 1);
    CHECK(a.run_id == "bandit-1-0");
    CHECK(b.run_id == "bandit-1-1");
    CHECK(to_json(a.records.back()).at("payload") != to_json(b.records.back()).at("payload"));
}

TEST_CASE("recall mode emits policy and threshold") {
    const auto dir = scratch("recall");
    auto cfg = load_config(fs::path(MGV_CONFIG_DIR) / "recall.json", {std::nullopt, 2, (dir / "r.jsonl").string()});
    std::get<RecallParams>(cfg.params).episodes = 20;
    run(cfg);
    REQUIRE(fs::exists(dir / "r.policy.json"));
    REQUIRE(fs::exists(dir / "r.threshold.csv"));
    REQUIRE(fs::exists(dir / "r.summary.json"));
    const auto policy = read_json_file(dir / "r.policy.json");
    CHECK(policy.at("cells").size() == 21 * 40);
    std::istringstream csv(slurp(dir / "r.threshold.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "t,z_threshold");
    int rows = 0;
    while (std::getline(csv, line)) ++rows;
    CHECK(rows == std::get<RecallParams>(cfg.params).mdp.horizon + 1);
}

TEST_CASE("threshold csv") {
    CHECK(threshold_csv({-1.5, std::nullopt}) == "t,z_threshold\n0,-1.5\n1,\n");
}

TEST_CASE("trace records are checked") {
    const auto dir = scratch("trace");
    std::vector<TraceRecord> recs{{"r", 0, "flavell", json::object(), 0}, {"r", 0, "flavell", json::object(), 1}};
    CHECK_THROWS(write_trace(dir / "t.jsonl", recs));
    recs[1].cycle = 1;
    write_trace(dir / "t.jsonl", recs);
    const auto back = read_trace(dir / "t.jsonl");
    REQUIRE(back.size() == 2);
    CHECK(back[1].cycle == 1);
    std::ofstream(dir / "bad.jsonl") << "{\"run_id\": 1}\n";
    CHECK_THROWS_AS(read_trace(dir / "bad.jsonl"), ParseError);
    CHECK_THROWS_AS(read_trace(dir / "none.jsonl"), MissingFile);
}

TEST_CASE("report counts cycles of a flavell run") {
    const auto dir = scratch("report_flavell");
    std::vector<TraceRecord> recs;
    for (int c = 0; c < 3; ++c) {
        const json status = c == 2 ? json{{"status", "terminated"}, {"reason", "none"}}
                                   : json{{"status", "active"}, {"reason", "none"}};
        recs.push_back({"f", c, "flavell", {{"tuple", {{"resources", 1.5}}}, {"status", status}}, c});
    }
    write_trace(dir / "f.jsonl", recs);
    const auto before = slurp(dir / "f.jsonl");
    const auto rep = report({dir / "f.jsonl"});
    REQUIRE(rep.at("runs").size() == 1);
    CHECK(rep["runs"][0]["cycles"] == 3);
    CHECK(rep["runs"][0]["status"] == "terminated/none");
    CHECK(rep["runs"][0]["resources"] == 4.5);
    CHECK(slurp(dir / "f.jsonl") == before);
    CHECK(report_table(rep).find("terminated/none") != std::string::npos);
}

TEST_CASE("report combines bandit logs") {
    const auto dir = scratch("report_bandit");
    for (std::uint64_t s : {1, 2}) run(parse_config(bandit_doc(s, (dir / ("b" + std::to_string(s) + ".jsonl")).string())));
    const auto rep = report({dir / "b1.jsonl", dir / "b2.jsonl"});
    CHECK(rep.at("bandit").at("episodes") == 100);
    double total = 0.0;
    for (const auto& f : rep["bandit"]["selection_frequencies"]) total += f.get<double>();
    CHECK(total == doctest::Approx(1.0));
    CHECK_THROWS_AS(report({dir / "missing.jsonl"}), MissingFile);
}

TEST_CASE("report orders recall times by drift") {
    const auto dir = scratch("report_recall");
    std::vector<TraceRecord> recs;
    int c = 0;
    auto add = [&](double drift, bool ok, int t) {
        recs.push_back({"r", c, "recall", {{"drift", drift}, {"episode", c}, {"recalled", ok}, {"time", t}}, c});
        ++c;
    };
    add(0.1, true, 6);
    add(0.1, false, 3);
    add(0.5, true, 2);
    add(0.5, false, 5);
    write_trace(dir / "r.jsonl", recs);
    const auto row = report({dir / "r.jsonl"})["runs"][0];
    CHECK(row["success_time_decreasing_in_drift"] == true);
    CHECK(row["give_up_time_increasing_in_drift"] == true);
    CHECK(row["drifts"][0]["success_time"]["mean"] == 6.0);
}
