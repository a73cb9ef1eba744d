#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "situate/eval.hpp"

namespace situate {

nlohmann::ordered_json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json run_result_to_json(const RunResult& result);
RunResult run_result_from_json(const nlohmann::ordered_json& j);

/// One row per method: method,median,failures,t01,t12,t23.
std::string summary_csv(const ExperimentReport& report);

/// Writes report.json, summary.csv, medians.svg, cumulative.svg and
/// intervals.svg into the directory (created if missing).
void emit_report(const ExperimentReport& report, const std::filesystem::path& directory);

}  // namespace situate
