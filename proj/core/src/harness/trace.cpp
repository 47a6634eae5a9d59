#include "mgv/harness/trace.hpp"

#include <fstream>
#include <map>

#include "mgv/errors.hpp"

namespace mgv::harness {

nlohmann::json to_json(const TraceRecord& r) {
    return {{"run_id", r.run_id},
            {"cycle", r.cycle},
            {"module", r.module},
            {"payload", r.payload},
            {"timestamp", r.timestamp}};
}

TraceRecord record_from_json(const nlohmann::json& j) {
    try {
        return {j.at("run_id").get<std::string>(), j.at("cycle").get<std::int64_t>(),
                j.at("module").get<std::string>(), j.at("payload"),
                j.at("timestamp").get<std::int64_t>()};
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed trace record: ") + e.what());
    }
}

void write_trace(const std::filesystem::path& path, const std::vector<TraceRecord>& records) {
    std::map<std::string, std::int64_t> last;
    for (const auto& r : records) {
        auto it = last.find(r.run_id);
        if (it != last.end() && r.cycle <= it->second) {
            throw Error("trace cycles must increase within run " + r.run_id);
        }
        last[r.run_id] = r.cycle;
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& r : records) out << to_json(r).dump() << '\n';
}

std::vector<TraceRecord> read_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFile(path.string());
    std::vector<TraceRecord> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(path.string() + ":" + std::to_string(n) + ": " + e.what());
        }
        out.push_back(record_from_json(j));
    }
    return out;
}

}  // namespace mgv::harness
