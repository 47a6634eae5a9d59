#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mgv::harness {

/// Per-run metrics for every run found in the given traces. Files are only
/// read. Throws MissingFile when a path does not exist.
nlohmann::json report(const std::vector<std::filesystem::path>& traces);

/// Aligned plain-text rendering of report().
std::string report_table(const nlohmann::json& report);

}  // namespace mgv::harness
