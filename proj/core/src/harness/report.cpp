#include "mgv/harness/report.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include "mgv/errors.hpp"
#include "mgv/harness/trace.hpp"

namespace mgv::harness {

using nlohmann::json;

namespace {

struct TimeStats {
    std::vector<int> times;

    json to_json() const {
        if (times.empty()) return {{"count", 0}, {"mean", nullptr}, {"histogram", json::object()}};
        double sum = 0.0;
        std::map<int, int> hist;
        for (int t : times) {
            sum += t;
            ++hist[t];
        }
        json h = json::object();
        for (auto [t, n] : hist) h[std::to_string(t)] = n;
        return {{"count", times.size()},
                {"mean", sum / static_cast<double>(times.size())},
                {"min", *std::min_element(times.begin(), times.end())},
                {"max", *std::max_element(times.begin(), times.end())},
                {"histogram", h}};
    }

    std::optional<double> mean() const {
        if (times.empty()) return std::nullopt;
        double sum = 0.0;
        for (int t : times) sum += t;
        return sum / static_cast<double>(times.size());
    }
};

double tuple_resources(const json& payload) {
    return payload.at("tuple").at("resources").get<double>();
}

std::string retrieval_status(const json& last) {
    if (last.at("decision").is_null()) return "terminate";
    const auto d = last.at("decision").get<std::string>();
    return d == "continue" ? "max_cycles" : d;
}

json summarize(const std::string& file, const std::string& run_id,
               const std::vector<const TraceRecord*>& recs) {
    const std::string& module = recs.front()->module;
    const json& last = recs.back()->payload;
    json row = {{"file", file},
                {"run_id", run_id},
                {"module", module},
                {"cycles", recs.size()},
                {"status", nullptr},
                {"resources", nullptr}};
    if (module == "flavell") {
        double r = 0.0;
        for (auto* rec : recs) r += tuple_resources(rec->payload);
        row["status"] = last.at("status").at("status").get<std::string>() + "/" +
                        last.at("status").at("reason").get<std::string>();
        row["resources"] = r;
    } else if (module == "acquisition") {
        double r = 0.0;
        for (auto* rec : recs) {
            for (const auto& item : rec->payload.at("items")) r += tuple_resources(item);
        }
        row["status"] = last.at("active_after").empty() ? "completed" : "unfinished";
        row["resources"] = r;
    } else if (module == "retrieval") {
        double r = 0.0;
        for (auto* rec : recs) r += tuple_resources(rec->payload);
        row["status"] = retrieval_status(last);
        row["resources"] = r;
    } else if (module == "bandit") {
        double regret = 0.0;
        std::map<std::size_t, std::size_t> counts;
        std::size_t arms = 0;
        for (auto* rec : recs) {
            regret += rec->payload.value("regret", 0.0);
            const auto chosen = rec->payload.at("chosen").get<std::size_t>();
            ++counts[chosen];
            arms = std::max(arms, rec->payload.at("sampled_vocs").size());
        }
        json freq = json::array();
        json cnt = json::array();
        for (std::size_t a = 0; a < arms; ++a) {
            cnt.push_back(counts[a]);
            freq.push_back(static_cast<double>(counts[a]) / static_cast<double>(recs.size()));
        }
        row["status"] = "completed";
        row["regret"] = regret;
        row["selection_counts"] = cnt;
        row["selection_frequencies"] = freq;
    } else if (module == "planning") {
        row["status"] = "stopped";
        row["final_plan_value"] = last.at("plan_value");
    } else if (module == "recall") {
        std::map<double, std::pair<TimeStats, TimeStats>> by_drift;
        for (auto* rec : recs) {
            auto& [ok, fail] = by_drift[rec->payload.at("drift").get<double>()];
            (rec->payload.at("recalled").get<bool>() ? ok : fail)
                .times.push_back(rec->payload.at("time").get<int>());
        }
        json drifts = json::array();
        std::vector<std::optional<double>> success_means, give_up_means;
        for (const auto& [drift, stats] : by_drift) {
            drifts.push_back({{"drift", drift},
                              {"success_time", stats.first.to_json()},
                              {"give_up_time", stats.second.to_json()}});
            success_means.push_back(stats.first.mean());
            give_up_means.push_back(stats.second.mean());
        }
        auto ordered = [](const std::vector<std::optional<double>>& m, bool decreasing) -> json {
            for (std::size_t i = 1; i < m.size(); ++i) {
                if (!m[i] || !m[i - 1]) return nullptr;
                if (decreasing ? !(*m[i] < *m[i - 1]) : !(*m[i] > *m[i - 1])) return false;
            }
            return true;
        };
        row["status"] = "simulated";
        row["drifts"] = drifts;
        row["success_time_decreasing_in_drift"] = ordered(success_means, true);
        row["give_up_time_increasing_in_drift"] = ordered(give_up_means, false);
    }
    return row;
}

std::string cell(const json& v) {
    if (v.is_null()) return "-";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) {
        std::ostringstream os;
        os << std::fixed << std::setprecision(4) << v.get<double>();
        return os.str();
    }
    return v.dump();
}

}  // namespace

json report(const std::vector<std::filesystem::path>& traces) {
    if (traces.empty()) throw Error("report needs at least one trace file");
    json runs = json::array();
    std::vector<std::size_t> bandit_counts;
    std::size_t bandit_total = 0;
    for (const auto& path : traces) {
        if (!std::filesystem::exists(path)) throw MissingFile(path.string());
        const auto records = read_trace(path);
        std::vector<std::string> order;
        std::map<std::string, std::vector<const TraceRecord*>> by_run;
        for (const auto& r : records) {
            if (!by_run.count(r.run_id)) order.push_back(r.run_id);
            by_run[r.run_id].push_back(&r);
        }
        for (const auto& id : order) {
            json row = summarize(path.string(), id, by_run[id]);
            if (row.contains("selection_counts")) {
                const auto& c = row.at("selection_counts");
                if (bandit_counts.size() < c.size()) bandit_counts.resize(c.size(), 0);
                for (std::size_t a = 0; a < c.size(); ++a) {
                    bandit_counts[a] += c[a].get<std::size_t>();
                    bandit_total += c[a].get<std::size_t>();
                }
            }
            runs.push_back(std::move(row));
        }
    }
    json out = {{"runs", runs}};
    if (bandit_total > 0) {
        json freq = json::array();
        for (auto c : bandit_counts) freq.push_back(static_cast<double>(c) / static_cast<double>(bandit_total));
        out["bandit"] = {{"episodes", bandit_total}, {"selection_frequencies", freq}};
    }
    return out;
}

std::string report_table(const json& rep) {
    const std::vector<std::string> cols = {"run_id", "module", "cycles", "status", "resources",
                                           "regret"};
    std::vector<std::vector<std::string>> rows;
    rows.push_back(cols);
    for (const auto& r : rep.at("runs")) {
        std::vector<std::string> row;
        for (const auto& c : cols) row.push_back(r.contains(c) ? cell(r.at(c)) : "-");
        rows.push_back(std::move(row));
    }
    std::vector<std::size_t> width(cols.size(), 0);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    }
    std::ostringstream os;
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            os << std::left << std::setw(static_cast<int>(width[i])) << row[i];
            os << (i + 1 == row.size() ? "\n" : "  ");
        }
    }
    for (const auto& r : rep.at("runs")) {
        if (!r.contains("drifts")) continue;
        os << "\n" << r.at("run_id").get<std::string>() << " recall times\n";
        os << std::left << std::setw(8) << "drift" << std::setw(12) << "successes" << std::setw(14)
           << "mean_success" << std::setw(10) << "give_ups" << "mean_give_up\n";
        for (const auto& d : r.at("drifts")) {
            os << std::left << std::setw(8) << cell(d.at("drift")) << std::setw(12)
               << cell(d.at("success_time").at("count")) << std::setw(14)
               << cell(d.at("success_time").at("mean")) << std::setw(10)
               << cell(d.at("give_up_time").at("count")) << cell(d.at("give_up_time").at("mean"))
               << "\n";
        }
    }
    return os.str();
}

}  // namespace mgv::harness
