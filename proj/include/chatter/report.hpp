#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "chatter/harness.hpp"

namespace chatter {

enum class ReportFormat { Json, Text, Csv, BarData };

nlohmann::json to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);

// Aligned table with rows r1, r1-r2, ..., r1-rd.
std::string format_text_table(const ExperimentReport& report);
// Header + one row per feature-vector size.
std::string format_csv(const ExperimentReport& report);
// method,classifier,level,k,mean,std of the best row (bar-chart data).
std::string format_bar_data(const ExperimentReport& report);

// Throws IoError when the path cannot be written.
void emit_report(const ExperimentReport& report, const std::filesystem::path& path, ReportFormat format);
// report.json, report.txt, report.csv and bars.csv under `dir`.
void emit_report_bundle(const ExperimentReport& report, const std::filesystem::path& dir);

ExperimentReport load_report(const std::filesystem::path& path);

} // namespace chatter
