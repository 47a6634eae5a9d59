#include "mgv/harness/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include "mgv/errors.hpp"

namespace mgv::harness {

using nlohmann::json;

namespace {

/// Field-tracking view over one JSON object. Every key read is marked so
/// finish() can reject the leftovers.
class Block {
public:
    Block(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
        if (!j_.is_object()) {
            throw ValidationError(prefix_.empty() ? "<root>" : prefix_, "expected an object");
        }
    }

    std::string path(const std::string& key) const {
        return prefix_.empty() ? key : prefix_ + "." + key;
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    template <class T>
    T get(const std::string& key, T fallback) {
        if (!has(key)) return fallback;
        return convert<T>(key);
    }

    template <class T>
    T require(const std::string& key) {
        if (!has(key)) throw ValidationError(path(key), "required");
        return convert<T>(key);
    }

    template <class T>
    std::optional<T> optional(const std::string& key) {
        if (!has(key) || j_.at(key).is_null()) {
            if (has(key)) seen_.insert(key);
            return std::nullopt;
        }
        return convert<T>(key);
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) throw ValidationError(path(key), "unknown field");
        }
    }

private:
    template <class T>
    T convert(const std::string& key) {
        seen_.insert(key);
        const json& v = j_.at(key);
        if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) throw ValidationError(path(key), "expected a number");
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ValidationError(path(key), "expected a boolean");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ValidationError(path(key), "expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (!v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
                    throw ValidationError(path(key), "must be >= 0");
                }
            }
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ValidationError(path(key), "expected a string");
        }
        try {
            return v.get<T>();
        } catch (const json::exception&) {
            throw ValidationError(path(key), "wrong type");
        }
    }

    const json& j_;
    std::string prefix_;
    std::set<std::string> seen_;
};

/// Module validate() messages start with the field name.
[[noreturn]] void rethrow_invalid(const std::invalid_argument& e, const std::string& prefix) {
    std::string msg = e.what();
    const auto space = msg.find(' ');
    std::string field = msg.substr(0, space);
    throw ValidationError(prefix.empty() ? field : prefix + "." + field, msg);
}

template <class F>
void check(const std::string& field, bool ok, F&& why) {
    if (!ok) throw ValidationError(field, why());
}

void check_unit(Block& b, const std::string& key, double v) {
    check(b.path(key), v >= 0.0 && v <= 1.0, [] { return "must lie in [0,1]"; });
}

KnowledgeStore parse_store(Block& parent, const std::string& key) {
    if (!parent.has(key)) return KnowledgeStore{};
    const json& j = parent.raw(key);
    Block b(j, parent.path(key));
    const double access = b.get("access_prob", 1.0);
    const double encoding = b.get("encoding_rate", 1.0);
    const int margin = b.get("prune_margin", KnowledgeStore::kDefaultPruneMargin);
    check_unit(b, "access_prob", access);
    check_unit(b, "encoding_rate", encoding);
    check(b.path("prune_margin"), margin >= 0, [] { return "must be >= 0"; });
    if (b.has("items")) {
        const json& items = b.raw("items");
        check(b.path("items"), items.is_array(), [] { return "expected an array"; });
        for (std::size_t i = 0; i < items.size(); ++i) {
            Block item(items[i], b.path("items") + "[" + std::to_string(i) + "]");
            item.require<std::string>("id");
            for (const char* k : {"category", "tags", "features", "successes", "failures",
                                  "calibration_records"}) {
                if (item.has(k)) item.raw(k);
            }
            item.finish();
        }
    }
    if (b.has("stm")) b.raw("stm");
    if (b.has("next_serial")) b.raw("next_serial");
    b.finish();
    try {
        return KnowledgeStore::from_json(j);
    } catch (const std::exception& e) {
        throw ValidationError(parent.path(key), e.what());
    }
}

TagSet parse_tags(Block& b, const std::string& key, bool required) {
    TagSet tags = required ? b.require<TagSet>(key) : b.get(key, TagSet{});
    if (required) check(b.path(key), !tags.empty(), [] { return "must be non-empty"; });
    return tags;
}

FlavellParams parse_flavell(Block& p) {
    FlavellParams out;
    out.task_tags = parse_tags(p, "task_tags", true);
    if (p.has("goal")) {
        Block g(p.raw("goal"), p.path("goal"));
        out.goal.success_threshold = g.get("success_threshold", out.goal.success_threshold);
        out.goal.max_cycles = g.get("max_cycles", out.goal.max_cycles);
        out.goal.failure_streak_limit = g.get("failure_streak_limit", out.goal.failure_streak_limit);
        out.goal.resource_budget = g.get("resource_budget", out.goal.resource_budget);
        g.finish();
        try {
            out.goal.validate();
        } catch (const std::invalid_argument& e) {
            rethrow_invalid(e, "");
        }
    }
    out.cycle.feel_prob = p.get("feel_prob", out.cycle.feel_prob);
    check_unit(p, "feel_prob", out.cycle.feel_prob);
    out.cycle.base_resources = p.get("base_resources", out.cycle.base_resources);
    check(p.path("base_resources"), out.cycle.base_resources > 0.0, [] { return "must be > 0"; });
    out.store = parse_store(p, "store");
    if (p.has("environment")) {
        Block e(p.raw("environment"), p.path("environment"));
        auto& env = out.environment;
        env.efficacy = e.get("efficacy", env.efficacy);
        env.default_efficacy = e.get("default_efficacy", env.default_efficacy);
        env.noise = e.get("noise", env.noise);
        env.resource_gain = e.get("resource_gain", env.resource_gain);
        env.completeness_prob = e.get("completeness_prob", env.completeness_prob);
        env.difficulty = e.get("difficulty", env.difficulty);
        e.finish();
        check(e.path("noise"), env.noise >= 0.0, [] { return "must be >= 0"; });
        check_unit(e, "completeness_prob", env.completeness_prob);
        check_unit(e, "difficulty", env.difficulty);
    }
    return out;
}

AcquireParams parse_acquire(Block& p) {
    AcquireParams out;
    auto& a = out.acquisition;
    a.target_performance = p.get("target_performance", a.target_performance);
    a.retention_discount = p.get("retention_discount", a.retention_discount);
    a.total_resources_per_cycle = p.get("total_resources_per_cycle", a.total_resources_per_cycle);
    a.max_cycles = p.get("max_cycles", a.max_cycles);
    a.feel_prob = p.get("feel_prob", a.feel_prob);
    a.jol_noise = p.get("jol_noise", a.jol_noise);
    a.learning_rate = p.get("learning_rate", a.learning_rate);
    a.epsilon = p.get("epsilon", a.epsilon);
    a.task_tags = p.get("task_tags", a.task_tags);
    a.fallback_strategy = p.get("fallback_strategy", a.fallback_strategy);
    const json& items = p.has("items") ? p.raw("items") : throw ValidationError("items", "required");
    check("items", items.is_array(), [] { return "expected an array"; });
    for (std::size_t i = 0; i < items.size(); ++i) {
        Block b(items[i], "items[" + std::to_string(i) + "]");
        LearnItem item;
        item.id = b.require<int>("id");
        item.latent_difficulty = b.get("latent_difficulty", item.latent_difficulty);
        item.mastery = b.get("mastery", item.mastery);
        b.finish();
        a.items.push_back(item);
    }
    out.store = parse_store(p, "store");
    try {
        a.validate();
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        if (msg.rfind("unbounded", 0) == 0) throw ValidationError("max_cycles", msg);
        if (msg.rfind("duplicate", 0) == 0 || msg.rfind("latent_difficulty", 0) == 0 ||
            msg.rfind("mastery", 0) == 0) {
            throw ValidationError("items", msg);
        }
        rethrow_invalid(e, "");
    }
    return out;
}

ThresholdUpdate parse_threshold_update(const std::string& s) {
    if (s == "from_base") return ThresholdUpdate::FromBase;
    if (s == "compound") return ThresholdUpdate::Compound;
    throw ValidationError("threshold_update", "expected 'from_base' or 'compound'");
}

RetrieveParams parse_retrieve(Block& p) {
    RetrieveParams out;
    out.query = parse_tags(p, "query", true);
    auto& r = out.retrieval;
    r.satisficing_rate = p.get("satisficing_rate", r.satisficing_rate);
    r.default_lambda_fok = p.get("default_lambda_fok", r.default_lambda_fok);
    r.default_lambda_confidence = p.get("default_lambda_confidence", r.default_lambda_confidence);
    r.max_cycles = p.get("max_cycles", r.max_cycles);
    if (p.has("threshold_update")) {
        r.threshold_update = parse_threshold_update(p.require<std::string>("threshold_update"));
    }
    try {
        r.validate();
    } catch (const std::invalid_argument& e) {
        rethrow_invalid(e, "");
    }
    out.store = parse_store(p, "store");
    if (p.has("environment")) {
        Block e(p.raw("environment"), p.path("environment"));
        auto& env = out.environment;
        env.target = e.optional<std::string>("target");
        env.lure = e.optional<std::string>("lure");
        env.match_rate = e.get("match_rate", env.match_rate);
        env.probe_samples = e.get("probe_samples", env.probe_samples);
        env.cue_samples = e.get("cue_samples", env.cue_samples);
        env.recognition_min = e.get("recognition_min", env.recognition_min);
        env.evidence_unit = e.get("evidence_unit", env.evidence_unit);
        env.candidate_confidence = e.get("candidate_confidence", env.candidate_confidence);
        env.stm_support = e.get("stm_support", env.stm_support);
        e.finish();
        check_unit(e, "match_rate", env.match_rate);
        check_unit(e, "candidate_confidence", env.candidate_confidence);
        check(e.path("evidence_unit"), env.evidence_unit >= 0.0, [] { return "must be >= 0"; });
        check(e.path("stm_support"), env.stm_support >= 0.0, [] { return "must be >= 0"; });
    }
    return out;
}

BanditParams parse_bandit(Block& p) {
    BanditParams out;
    const json& arms = p.has("arms") ? p.raw("arms") : throw ValidationError("arms", "required");
    check("arms", arms.is_array() && !arms.empty(), [] { return "expected a non-empty array"; });
    for (std::size_t i = 0; i < arms.size(); ++i) {
        Block b(arms[i], "arms[" + std::to_string(i) + "]");
        ArmSpec arm;
        arm.name = b.get("name", "arm" + std::to_string(i));
        arm.utility_weights = b.require<std::vector<double>>("utility_weights");
        arm.time_weights = b.get("time_weights", std::vector<double>{});
        arm.utility_noise = b.get("utility_noise", arm.utility_noise);
        arm.time_noise = b.get("time_noise", arm.time_noise);
        arm.binary = b.get("binary", arm.binary);
        b.finish();
        if (arm.time_weights.empty()) {
            arm.time_weights.assign(arm.utility_weights.size(), 0.0);
            arm.time_weights[0] = 1.0;
        }
        check(b.path("utility_noise"), arm.utility_noise >= 0.0, [] { return "must be >= 0"; });
        check(b.path("time_noise"), arm.time_noise >= 0.0, [] { return "must be >= 0"; });
        out.task.arms.push_back(std::move(arm));
    }
    out.task.feature_dim = p.get("feature_dim", out.task.arms.front().utility_weights.size());
    for (std::size_t i = 0; i < out.task.arms.size(); ++i) {
        const auto& a = out.task.arms[i];
        check("arms[" + std::to_string(i) + "]",
              a.utility_weights.size() == out.task.feature_dim &&
                  a.time_weights.size() == out.task.feature_dim,
              [] { return "weight length differs from feature_dim"; });
    }
    check("feature_dim", out.task.feature_dim >= 1, [] { return "must be >= 1"; });
    const auto kind = p.get<std::string>("features", "constant");
    if (kind == "constant") out.task.features = FeatureKind::Constant;
    else if (kind == "uniform") out.task.features = FeatureKind::Uniform;
    else throw ValidationError("features", "expected 'constant' or 'uniform'");
    out.episodes = p.get("episodes", out.episodes);
    check("episodes", out.episodes >= 1, [] { return "must be >= 1"; });
    out.prior_variance = p.get("prior_variance", out.prior_variance);
    out.utility_noise_variance = p.get("utility_noise_variance", out.utility_noise_variance);
    out.time_noise_variance = p.get("time_noise_variance", out.time_noise_variance);
    check("prior_variance", out.prior_variance > 0.0, [] { return "must be > 0"; });
    check("utility_noise_variance", out.utility_noise_variance > 0.0, [] { return "must be > 0"; });
    check("time_noise_variance", out.time_noise_variance > 0.0, [] { return "must be > 0"; });
    if (p.has("gamma_prior")) {
        Block g(p.raw("gamma_prior"), "gamma_prior");
        out.gamma_prior_reward = g.get("reward", out.gamma_prior_reward);
        out.gamma_prior_time = g.get("time", out.gamma_prior_time);
        g.finish();
        check("gamma_prior.time", out.gamma_prior_time > 0.0, [] { return "must be > 0"; });
    }
    return out;
}

PlanParams parse_plan(Block& p) {
    PlanParams out;
    const json& nodes = p.has("nodes") ? p.raw("nodes") : throw ValidationError("nodes", "required");
    check("nodes", nodes.is_array() && !nodes.empty(), [] { return "expected a non-empty array"; });
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        Block b(nodes[i], "nodes[" + std::to_string(i) + "]");
        b.require<int>("parent");
        b.require<std::vector<double>>("support");
        b.require<std::vector<double>>("probs");
        b.finish();
    }
    try {
        out.tree = tree_from_json(json{{"nodes", nodes}});
    } catch (const std::exception& e) {
        throw ValidationError("nodes", e.what());
    }
    out.values = p.optional<std::vector<double>>("values");
    if (out.values) {
        check("values", out.values->size() == out.tree.size(),
              [] { return "length differs from the node count"; });
    }
    out.lambda = p.get("lambda", out.lambda);
    check("lambda", out.lambda >= 0.0, [] { return "must be >= 0"; });
    return out;
}

RecallParams parse_recall(Block& p) {
    RecallParams out;
    auto& m = out.mdp;
    m.drift_prior_mean = p.get("drift_prior_mean", m.drift_prior_mean);
    m.drift_prior_variance = p.get("drift_prior_variance", m.drift_prior_variance);
    m.evidence_variance = p.get("evidence_variance", m.evidence_variance);
    m.recall_threshold = p.get("recall_threshold", m.recall_threshold);
    m.recall_utility = p.get("recall_utility", m.recall_utility);
    m.search_cost = p.get("search_cost", m.search_cost);
    m.horizon = p.get("horizon", m.horizon);
    m.z_min = p.optional<double>("z_min");
    m.z_step = p.optional<double>("z_step");
    try {
        m.validate();
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        if (msg.rfind("z grid min", 0) == 0) throw ValidationError("z_min", msg);
        if (msg.rfind("z grid", 0) == 0) throw ValidationError("z_step", msg);
        rethrow_invalid(e, "");
    }
    if (p.has("simulate")) {
        Block s(p.raw("simulate"), "simulate");
        out.drifts = s.require<std::vector<double>>("drifts");
        out.episodes = s.get("episodes", 1000);
        s.finish();
        check("simulate.episodes", out.episodes >= 1, [] { return "must be >= 1"; });
    }
    return out;
}

json store_json(const KnowledgeStore& s) { return s.to_json(); }

json params_to_json(const ModeParams& params) {
    return std::visit(
        [](const auto& p) -> json {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, FlavellParams>) {
                const auto& env = p.environment;
                return {{"task_tags", p.task_tags},
                        {"goal",
                         {{"success_threshold", p.goal.success_threshold},
                          {"max_cycles", p.goal.max_cycles},
                          {"failure_streak_limit", p.goal.failure_streak_limit},
                          {"resource_budget", p.goal.resource_budget}}},
                        {"feel_prob", p.cycle.feel_prob},
                        {"base_resources", p.cycle.base_resources},
                        {"store", store_json(p.store)},
                        {"environment",
                         {{"efficacy", env.efficacy},
                          {"default_efficacy", env.default_efficacy},
                          {"noise", env.noise},
                          {"resource_gain", env.resource_gain},
                          {"completeness_prob", env.completeness_prob},
                          {"difficulty", env.difficulty}}}};
            } else if constexpr (std::is_same_v<P, AcquireParams>) {
                const auto& a = p.acquisition;
                json items = json::array();
                for (const auto& i : a.items) {
                    items.push_back({{"id", i.id},
                                     {"latent_difficulty", i.latent_difficulty},
                                     {"mastery", i.mastery}});
                }
                return {{"target_performance", a.target_performance},
                        {"retention_discount", a.retention_discount},
                        {"total_resources_per_cycle", a.total_resources_per_cycle},
                        {"items", items},
                        {"max_cycles", a.max_cycles},
                        {"feel_prob", a.feel_prob},
                        {"jol_noise", a.jol_noise},
                        {"learning_rate", a.learning_rate},
                        {"epsilon", a.epsilon},
                        {"task_tags", a.task_tags},
                        {"fallback_strategy", a.fallback_strategy},
                        {"store", store_json(p.store)}};
            } else if constexpr (std::is_same_v<P, RetrieveParams>) {
                const auto& r = p.retrieval;
                const auto& e = p.environment;
                auto opt = [](const std::optional<std::string>& s) {
                    return s ? json(*s) : json(nullptr);
                };
                return {{"query", p.query},
                        {"satisficing_rate", r.satisficing_rate},
                        {"default_lambda_fok", r.default_lambda_fok},
                        {"default_lambda_confidence", r.default_lambda_confidence},
                        {"max_cycles", r.max_cycles},
                        {"threshold_update", r.threshold_update == ThresholdUpdate::FromBase
                                                 ? "from_base"
                                                 : "compound"},
                        {"store", store_json(p.store)},
                        {"environment",
                         {{"target", opt(e.target)},
                          {"lure", opt(e.lure)},
                          {"match_rate", e.match_rate},
                          {"probe_samples", e.probe_samples},
                          {"cue_samples", e.cue_samples},
                          {"recognition_min", e.recognition_min},
                          {"evidence_unit", e.evidence_unit},
                          {"candidate_confidence", e.candidate_confidence},
                          {"stm_support", e.stm_support}}}};
            } else if constexpr (std::is_same_v<P, BanditParams>) {
                json arms = json::array();
                for (const auto& a : p.task.arms) {
                    arms.push_back({{"name", a.name},
                                    {"utility_weights", a.utility_weights},
                                    {"time_weights", a.time_weights},
                                    {"utility_noise", a.utility_noise},
                                    {"time_noise", a.time_noise},
                                    {"binary", a.binary}});
                }
                return {{"arms", arms},
                        {"feature_dim", p.task.feature_dim},
                        {"features",
                         p.task.features == FeatureKind::Constant ? "constant" : "uniform"},
                        {"episodes", p.episodes},
                        {"prior_variance", p.prior_variance},
                        {"utility_noise_variance", p.utility_noise_variance},
                        {"time_noise_variance", p.time_noise_variance},
                        {"gamma_prior",
                         {{"reward", p.gamma_prior_reward}, {"time", p.gamma_prior_time}}}};
            } else if constexpr (std::is_same_v<P, PlanParams>) {
                json j = tree_to_json(p.tree);
                j["values"] = p.values ? json(*p.values) : json(nullptr);
                j["lambda"] = p.lambda;
                return j;
            } else {
                const auto& m = p.mdp;
                const ZGrid grid = m.grid();
                json j = {{"drift_prior_mean", m.drift_prior_mean},
                          {"drift_prior_variance", m.drift_prior_variance},
                          {"evidence_variance", m.evidence_variance},
                          {"recall_threshold", m.recall_threshold},
                          {"recall_utility", m.recall_utility},
                          {"search_cost", m.search_cost},
                          {"horizon", m.horizon},
                          {"z_min", grid.min()},
                          {"z_step", grid.step()}};
                if (!p.drifts.empty()) {
                    j["simulate"] = {{"drifts", p.drifts}, {"episodes", p.episodes}};
                }
                return j;
            }
        },
        params);
}

}  // namespace

const char* to_string(Mode m) noexcept {
    switch (m) {
        case Mode::Flavell: return "flavell";
        case Mode::Acquire: return "acquire";
        case Mode::Retrieve: return "retrieve";
        case Mode::Bandit: return "bandit";
        case Mode::Plan: return "plan";
        case Mode::RecallMdp: return "recall";
    }
    return "?";
}

Mode parse_mode(const std::string& name) {
    for (Mode m : {Mode::Flavell, Mode::Acquire, Mode::Retrieve, Mode::Bandit, Mode::Plan,
                   Mode::RecallMdp}) {
        if (name == to_string(m)) return m;
    }
    throw ValidationError("mode", "unknown mode '" + name + "'");
}

RunConfig parse_config(const json& doc, const ConfigOverrides& overrides) {
    if (!doc.is_object()) throw ValidationError("<root>", "expected an object");
    RunConfig config;
    const bool full = doc.contains("params");
    Block root(doc, "");

    std::optional<Mode> mode = overrides.mode;
    std::optional<std::uint64_t> seed = overrides.seed;
    std::optional<std::string> output = overrides.output;
    const json* params = &doc;
    if (full) {
        if (root.has("mode")) {
            const Mode file_mode = parse_mode(root.require<std::string>("mode"));
            if (mode && *mode != file_mode) {
                throw ValidationError("mode", std::string("file declares '") + to_string(file_mode) +
                                                  "' but the command runs '" + to_string(*mode) + "'");
            }
            mode = file_mode;
        }
        if (root.has("seed")) {
            const auto file_seed = root.require<std::uint64_t>("seed");
            if (!seed) seed = file_seed;
        }
        if (root.has("output")) {
            const auto file_output = root.require<std::string>("output");
            if (!output) output = file_output;
        }
        params = &root.raw("params");
        root.finish();
    }
    if (!mode) throw ValidationError("mode", "required");
    if (!seed) throw ValidationError("seed", "required");
    config.mode = *mode;
    config.seed = *seed;
    if (output) config.output = *output;

    Block p(*params, "");
    switch (config.mode) {
        case Mode::Flavell: config.params = parse_flavell(p); break;
        case Mode::Acquire: config.params = parse_acquire(p); break;
        case Mode::Retrieve: config.params = parse_retrieve(p); break;
        case Mode::Bandit: config.params = parse_bandit(p); break;
        case Mode::Plan: config.params = parse_plan(p); break;
        case Mode::RecallMdp: config.params = parse_recall(p); break;
    }
    p.finish();
    return config;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingFile(path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

RunConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
    return parse_config(read_json_file(path), overrides);
}

json config_to_json(const RunConfig& config) {
    return {{"mode", to_string(config.mode)},
            {"seed", config.seed},
            {"output", config.output},
            {"params", params_to_json(config.params)}};
}

void save_config(const RunConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << config_to_json(config).dump(2) << '\n';
}

}  // namespace mgv::harness
