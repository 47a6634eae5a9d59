// mgv: command-line front end for the metacognition simulation harness.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mgv/errors.hpp"
#include "mgv/harness/config.hpp"
#include "mgv/harness/report.hpp"
#include "mgv/harness/runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mgv::harness;

namespace {

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("mgv");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    const char* env = std::getenv("MGV_LOG_LEVEL");
    const std::string level = env ? env : "info";
    if (level == "error") spdlog::set_level(spdlog::level::err);
    else if (level == "debug") spdlog::set_level(spdlog::level::debug);
    else spdlog::set_level(spdlog::level::info);
    if (level != "error" && level != "info" && level != "debug") {
        spdlog::warn("unknown MGV_LOG_LEVEL '{}', using info", level);
    }
}

int fail(const std::string& kind, const std::string& message,
         const std::optional<std::string>& field = std::nullopt, int code = 1) {
    json err = {{"error", kind}, {"message", message}};
    if (field) err["field"] = *field;
    std::cout << err.dump() << std::endl;
    spdlog::error("{}", message);
    return code;
}

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    int repeat = 1;
};

void add_common(CLI::App* cmd, Common& c, const std::string& config_flag, bool config_required) {
    auto* opt = cmd->add_option(config_flag, c.config, "Configuration JSON");
    if (config_required) opt->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "Root random seed (overrides the file)");
    cmd->add_option("--out", c.out, "Trace JSONL output path");
    cmd->add_option("--repeat", c.repeat, "Independent repeats on derived substreams")
        ->check(CLI::PositiveNumber);
}

int run_mode(Mode mode, const Common& c, RunOptions options,
             const std::function<void(RunConfig&)>& adjust = {}) {
    options.repeat = c.repeat;
    ConfigOverrides ov{mode, c.seed, c.out};
    if (mode == Mode::RecallMdp && !c.seed) {
        // Solving is deterministic; seed only matters for simulation.
        const json doc = read_json_file(c.config);
        if (!doc.contains("seed")) ov.seed = 0;
    }
    RunConfig config = load_config(c.config, ov);
    if (adjust) adjust(config);
    spdlog::debug("config: {}", config_to_json(config).dump());
    spdlog::info("running {} seed={} repeat={}", to_string(mode), config.seed, options.repeat);
    const auto artifacts = run(config, options);
    for (const auto& w : artifacts.warnings) spdlog::warn("{}", w);
    for (const auto& f : artifacts.files) spdlog::info("wrote {}", f.string());

    json line = {{"mode", to_string(mode)}, {"seed", config.seed}};
    const auto& runs = artifacts.summary.at("runs");
    if (runs.size() == 1) {
        line.update(runs.front());
    } else {
        line["runs"] = runs.size();
        line["aggregate"] = artifacts.summary.at("aggregate");
    }
    if (!artifacts.warnings.empty()) line["warnings"] = artifacts.warnings;
    std::cout << line.dump() << std::endl;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();

    CLI::App app{"mgv: metacognitive control simulations"};
    app.require_subcommand(1);

    Common flavell, acquire, retrieve, bandit, plan, recall;
    auto* c_flavell = app.add_subcommand("flavell", "Run the monitor/control cycle on a synthetic task");
    add_common(c_flavell, flavell, "--config", true);
    auto* c_acquire = app.add_subcommand("acquire", "Run the study-time allocation loop");
    add_common(c_acquire, acquire, "--config", true);
    auto* c_retrieve = app.add_subcommand("retrieve", "Run the satisficing retrieval loop");
    add_common(c_retrieve, retrieve, "--config", true);

    std::optional<int> episodes;
    auto* c_bandit = app.add_subcommand("bandit", "Thompson-sampling strategy selection");
    add_common(c_bandit, bandit, "--arms", true);
    c_bandit->add_option("--episodes", episodes, "Episodes (overrides the file)")
        ->check(CLI::PositiveNumber);

    std::optional<double> lambda;
    auto* c_plan = app.add_subcommand("plan", "Myopic VOC planning on a reward tree");
    add_common(c_plan, plan, "--tree", true);
    c_plan->add_option("--lambda", lambda, "Expansion cost")->check(CLI::NonNegativeNumber);

    std::optional<std::string> emit_policy, emit_threshold;
    std::optional<int> recall_episodes;
    auto* c_recall = app.add_subcommand("solve-recall", "Solve the recall stopping problem");
    add_common(c_recall, recall, "--config", true);
    c_recall->add_option("--emit-policy", emit_policy, "Policy table JSON path");
    c_recall->add_option("--emit-threshold", emit_threshold, "Threshold CSV path");
    c_recall->add_option("--episodes", recall_episodes, "Simulated episodes per drift")
        ->check(CLI::PositiveNumber);

    std::vector<std::string> traces;
    std::optional<std::string> report_out;
    auto* c_report = app.add_subcommand("report", "Summarize trace files");
    c_report->add_option("traces", traces, "Trace JSONL files")->required();
    c_report->add_option("--out", report_out, "Write the JSON report here");
    c_report->add_flag("--json", "Print JSON instead of the table");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*c_flavell) return run_mode(Mode::Flavell, flavell, {});
        if (*c_acquire) return run_mode(Mode::Acquire, acquire, {});
        if (*c_retrieve) return run_mode(Mode::Retrieve, retrieve, {});
        if (*c_bandit) {
            return run_mode(Mode::Bandit, bandit, {}, [&](RunConfig& cfg) {
                if (episodes) std::get<BanditParams>(cfg.params).episodes = *episodes;
            });
        }
        if (*c_plan) {
            return run_mode(Mode::Plan, plan, {}, [&](RunConfig& cfg) {
                if (lambda) std::get<PlanParams>(cfg.params).lambda = *lambda;
            });
        }
        if (*c_recall) {
            RunOptions opts;
            if (emit_policy) opts.policy_path = *emit_policy;
            if (emit_threshold) opts.threshold_path = *emit_threshold;
            return run_mode(Mode::RecallMdp, recall, opts, [&](RunConfig& cfg) {
                if (recall_episodes) std::get<RecallParams>(cfg.params).episodes = *recall_episodes;
            });
        }
        if (*c_report) {
            std::vector<fs::path> paths(traces.begin(), traces.end());
            const json rep = report(paths);
            if (report_out) {
                std::ofstream out(*report_out);
                if (!out) return fail("Error", "cannot write " + *report_out);
                out << rep.dump(2) << '\n';
            }
            if (c_report->count("--json")) std::cout << rep.dump() << std::endl;
            else std::cout << report_table(rep);
            return 0;
        }
    } catch (const mgv::ValidationError& e) {
        return fail("ValidationError", e.what(), e.field(), 2);
    } catch (const mgv::ParseError& e) {
        return fail("ParseError", e.what(), std::nullopt, 2);
    } catch (const mgv::MissingFile& e) {
        return fail("MissingFile", e.what(), std::nullopt, 2);
    } catch (const mgv::NonMonotonePolicy& e) {
        return fail("NonMonotonePolicy", e.what());
    } catch (const mgv::NoCalibrationHistory& e) {
        return fail("NoCalibrationHistory", e.what());
    } catch (const mgv::NoApplicableStrategy& e) {
        return fail("NoApplicableStrategy", e.what());
    } catch (const mgv::DimensionMismatch& e) {
        return fail("DimensionMismatch", e.what());
    } catch (const mgv::Error& e) {
        return fail("Error", e.what());
    } catch (const std::exception& e) {
        return fail("InternalError", e.what());
    }
    return 0;
}
