#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mgv::harness {

/// One JSONL line. `timestamp` is a logical clock (records written so far
/// by the run) so traces stay byte-identical across repeats.
struct TraceRecord {
    std::string run_id;
    std::int64_t cycle = 0;
    std::string module;
    nlohmann::json payload = nlohmann::json::object();
    std::int64_t timestamp = 0;
};

nlohmann::json to_json(const TraceRecord& r);
TraceRecord record_from_json(const nlohmann::json& j);

/// Writes records in order; refuses a cycle that does not advance within its run.
void write_trace(const std::filesystem::path& path, const std::vector<TraceRecord>& records);
/// Throws MissingFile / ParseError.
std::vector<TraceRecord> read_trace(const std::filesystem::path& path);

}  // namespace mgv::harness
