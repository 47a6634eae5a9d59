#include "mgv/harness/runner.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "mgv/acquisition.hpp"
#include "mgv/errors.hpp"
#include "mgv/flavell.hpp"
#include "mgv/harness/environments.hpp"
#include "mgv/planning.hpp"
#include "mgv/retrieval.hpp"
#include "mgv/voc_bandit.hpp"

namespace mgv::harness {

using nlohmann::json;

namespace {

class Recorder {
public:
    Recorder(RunOutput& out, std::string module) : out_(out), module_(std::move(module)) {}

    void add(std::int64_t cycle, json payload) {
        out_.records.push_back({out_.run_id, cycle, module_, std::move(payload),
                                static_cast<std::int64_t>(out_.records.size())});
    }

private:
    RunOutput& out_;
    std::string module_;
};

void run_flavell(const FlavellParams& p, Rng& rng, RunOutput& out) {
    SyntheticTaskEnvironment env(p.environment);
    KnowledgeStore store = p.store;
    const auto result = run_cycle(p.task_tags, p.goal, env, store, p.cycle, rng);
    Recorder rec(out, "flavell");
    double resources = 0.0;
    for (const auto& step : result.trace) {
        resources += step.tuple.resources;
        rec.add(step.tuple.cycle, step);
    }
    out.summary = {{"status", to_string(result.state.status.status)},
                   {"reason", to_string(result.state.status.reason)},
                   {"cycles", result.state.cycle},
                   {"resources_spent", resources},
                   {"store_items", store.ltm().size()}};
}

void run_acquire(const AcquireParams& p, Rng& rng, RunOutput& out) {
    KnowledgeStore store = p.store;
    const auto result = run_acquisition(p.acquisition, store, rng);
    Recorder rec(out, "acquisition");
    for (const auto& c : result.cycles) rec.add(c.cycle, c);
    if (result.norm_exceeds_jol_ceiling) {
        out.warnings.push_back("norm of study exceeds the JOL ceiling of 1; items cannot be "
                               "mastered and the run stops at max_cycles");
    }
    out.summary = {{"status", to_string(result.status)},
                   {"cycles_used", result.cycles_used()},
                   {"items_mastered", result.items_mastered()},
                   {"total_resources", result.total_resources},
                   {"norm_of_study", result.state.norm_of_study},
                   {"consolidated", result.consolidated}};
}

void run_retrieve(const RetrieveParams& p, Rng& rng, RunOutput& out) {
    CueStatisticsEnvironment env(p.environment);
    KnowledgeStore store = p.store;
    const auto result = run_retrieval(p.query, store, env, p.retrieval, rng);
    Recorder rec(out, "retrieval");
    double resources = 0.0;
    for (const auto& step : result.trace) {
        resources += step.tuple.resources;
        rec.add(step.cycle, step);
    }
    out.summary = result_json(result);
    out.summary["resources_spent"] = resources;
    out.summary["consolidated"] = result.consolidated;
}

void run_bandit(const BanditParams& p, Rng& rng, RunOutput& out) {
    const BanditTask task(p.task);
    BanditState state = BanditState::make(task.arms(), p.task.feature_dim, p.prior_variance,
                                          p.utility_noise_variance, p.time_noise_variance);
    state.prior_reward = p.gamma_prior_reward;
    state.prior_time = p.gamma_prior_time;
    Rng env_rng = rng.substream("environment");
    Rng policy_rng = rng.substream("policy");
    Recorder rec(out, "bandit");

    std::vector<std::size_t> counts(task.arms(), 0);
    double regret = 0.0;
    for (int e = 0; e < p.episodes; ++e) {
        const Eigen::VectorXd f = task.draw_features(env_rng);
        const double gamma = state.gamma();
        const auto choice = thompson_select(state, f, gamma, policy_rng);
        const auto [utility, elapsed] = task.execute(choice.index, f, env_rng);
        observe(state, choice.index, f, utility, elapsed);
        double best = task.expected_voc(0, f, gamma);
        for (std::size_t a = 1; a < task.arms(); ++a) best = std::max(best, task.expected_voc(a, f, gamma));
        const double step_regret = best - task.expected_voc(choice.index, f, gamma);
        regret += step_regret;
        ++counts[choice.index];
        rec.add(e, {{"features", std::vector<double>(f.data(), f.data() + f.size())},
                    {"chosen", choice.index},
                    {"sampled_vocs", choice.sampled_vocs},
                    {"reward", utility},
                    {"time", elapsed},
                    {"gamma", gamma},
                    {"regret", step_regret}});
    }
    json freq = json::array();
    for (auto c : counts) freq.push_back(static_cast<double>(c) / p.episodes);
    json names = json::array();
    for (const auto& a : p.task.arms) names.push_back(a.name);
    out.summary = {{"episodes", p.episodes},
                   {"arms", names},
                   {"selection_counts", counts},
                   {"selection_frequencies", freq},
                   {"cumulative_regret", regret},
                   {"final_gamma", state.gamma()}};
}

double sample_prior(const RewardPrior& prior, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < prior.support.size(); ++i) {
        acc += prior.probs[i];
        if (u < acc) return prior.support[i];
    }
    return prior.support.back();
}

void run_plan(const PlanParams& p, Rng& rng, RunOutput& out) {
    std::vector<double> values;
    if (p.values) {
        values = *p.values;
    } else {
        values.push_back(0.0);
        for (std::size_t i = 1; i < p.tree.size(); ++i) values.push_back(sample_prior(p.tree.prior(i), rng));
    }
    const auto initial = PlanningState::initial(p.tree);
    const auto result = run_myopic_planner(initial, p.lambda, values);
    Recorder rec(out, "planning");
    for (std::size_t i = 0; i < result.steps.size(); ++i) {
        const auto& s = result.steps[i];
        rec.add(static_cast<std::int64_t>(i), {{"node", s.node},
                                               {"voc", s.voc},
                                               {"revealed", s.revealed},
                                               {"plan_value", s.plan_value}});
    }
    out.summary = {{"expansions", result.expansions()},
                   {"lambda", p.lambda},
                   {"baseline_plan_value", plan_value(initial)},
                   {"final_plan_value", plan_value(result.final_state)},
                   {"net_reward", result.net_reward}};
}

void run_recall(const RecallParams& p, Rng& rng, RunOutput& out) {
    out.policy = solve_recall_mdp(p.mdp);
    out.thresholds = stopping_threshold(*out.policy);
    const auto& policy = *out.policy;
    Recorder rec(out, "recall");

    json drifts = json::array();
    std::int64_t cycle = 0;
    for (std::size_t i = 0; i < p.drifts.size(); ++i) {
        Rng sim = rng.substream("drift", i);
        int successes = 0, give_ups = 0;
        double success_time = 0.0, give_up_time = 0.0;
        for (int e = 0; e < p.episodes; ++e) {
            const auto ep = simulate_recall(policy, p.mdp, p.drifts[i], sim);
            if (ep.recalled) {
                ++successes;
                success_time += ep.time;
            } else {
                ++give_ups;
                give_up_time += ep.time;
            }
            rec.add(cycle++, {{"drift", p.drifts[i]},
                              {"episode", e},
                              {"recalled", ep.recalled},
                              {"time", ep.time}});
        }
        drifts.push_back(
            {{"drift", p.drifts[i]},
             {"episodes", p.episodes},
             {"successes", successes},
             {"give_ups", give_ups},
             {"mean_success_time", successes ? json(success_time / successes) : json(nullptr)},
             {"mean_give_up_time", give_ups ? json(give_up_time / give_ups) : json(nullptr)}});
    }
    json thresholds = json::array();
    for (const auto& t : out.thresholds) thresholds.push_back(t ? json(*t) : json(nullptr));
    const auto start = policy.grid.cell_of(0.0);
    out.summary = {{"horizon", policy.horizon},
                   {"cells", policy.grid.cells()},
                   {"start_value", policy.value_at(0, start)},
                   {"start_action", to_string(policy.action[0][std::min(start, policy.grid.cells() - 1)])},
                   {"thresholds", thresholds},
                   {"drifts", drifts}};
}

json aggregate(const std::vector<json>& runs) {
    json agg = json::object();
    if (runs.empty()) return agg;
    for (const auto& [key, value] : runs.front().items()) {
        if (!value.is_number()) continue;
        double sum = 0.0;
        bool ok = true;
        for (const auto& r : runs) {
            if (!r.contains(key) || !r.at(key).is_number()) {
                ok = false;
                break;
            }
            sum += r.at(key).get<double>();
        }
        if (ok) agg["mean_" + key] = sum / static_cast<double>(runs.size());
    }
    return agg;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

std::filesystem::path sibling(const std::filesystem::path& trace, const std::string& suffix) {
    auto p = trace;
    p.replace_extension();
    p += suffix;
    return p;
}

}  // namespace

std::filesystem::path summary_path_for(const std::filesystem::path& trace) {
    return sibling(trace, ".summary.json");
}

std::string threshold_csv(const std::vector<std::optional<double>>& thresholds) {
    std::ostringstream os;
    os << "t,z_threshold\n";
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
        os << t << ',';
        if (thresholds[t]) os << json(*thresholds[t]).dump();
        os << '\n';
    }
    return os.str();
}

RunOutput execute(const RunConfig& config, std::size_t index) {
    RunOutput out;
    out.run_id = std::string(to_string(config.mode)) + "-" + std::to_string(config.seed) + "-" +
                 std::to_string(index);
    Rng rng = Rng(config.seed).substream(to_string(config.mode), index);
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, FlavellParams>) run_flavell(p, rng, out);
            else if constexpr (std::is_same_v<P, AcquireParams>) run_acquire(p, rng, out);
            else if constexpr (std::is_same_v<P, RetrieveParams>) run_retrieve(p, rng, out);
            else if constexpr (std::is_same_v<P, BanditParams>) run_bandit(p, rng, out);
            else if constexpr (std::is_same_v<P, PlanParams>) run_plan(p, rng, out);
            else run_recall(p, rng, out);
        },
        config.params);
    out.summary["run_id"] = out.run_id;
    return out;
}

RunArtifacts run(const RunConfig& config, const RunOptions& options) {
    if (options.repeat < 1) throw ValidationError("repeat", "must be >= 1");
    RunArtifacts artifacts;
    std::vector<TraceRecord> records;
    std::vector<json> summaries;
    std::optional<RunOutput> first;
    for (int i = 0; i < options.repeat; ++i) {
        auto out = execute(config, static_cast<std::size_t>(i));
        for (auto& r : out.records) {
            r.timestamp = static_cast<std::int64_t>(records.size());
            records.push_back(std::move(r));
        }
        summaries.push_back(out.summary);
        for (auto& w : out.warnings) {
            if (std::find(artifacts.warnings.begin(), artifacts.warnings.end(), w) ==
                artifacts.warnings.end()) {
                artifacts.warnings.push_back(w);
            }
        }
        if (i == 0) first = std::move(out);
    }

    const std::filesystem::path trace = config.output;
    write_trace(trace, records);
    artifacts.files.push_back(trace);

    if (config.mode == Mode::RecallMdp && first && first->policy) {
        const auto policy_path = options.policy_path.value_or(sibling(trace, ".policy.json"));
        const auto threshold_path = options.threshold_path.value_or(sibling(trace, ".threshold.csv"));
        write_text(policy_path, policy_to_json(*first->policy).dump(2) + "\n");
        write_text(threshold_path, threshold_csv(first->thresholds));
        artifacts.files.push_back(policy_path);
        artifacts.files.push_back(threshold_path);
    }

    json summary = {{"mode", to_string(config.mode)},
                    {"seed", config.seed},
                    {"repeat", options.repeat},
                    {"trace", trace.string()},
                    {"runs", summaries},
                    {"warnings", artifacts.warnings}};
    if (options.repeat > 1) summary["aggregate"] = aggregate(summaries);
    const auto summary_path = summary_path_for(trace);
    write_text(summary_path, summary.dump(2) + "\n");
    artifacts.files.push_back(summary_path);
    artifacts.summary = std::move(summary);
    return artifacts;
}

}  // namespace mgv::harness
