#pragma once
// Report tables (tab-separated) and static SVG plots rendered from a run's
// metrics.json.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ccprobe {

inline constexpr const char* kMetricsFile = "metrics.json";
inline constexpr const char* kReportDir = "report";

struct BarSeries {
  std::string name;
  std::vector<std::optional<double>> values;  // one per category; nullopt leaves a gap
  std::vector<double> errors;                 // optional symmetric error bars
};

struct BarChart {
  std::string title;
  std::string y_label;
  std::vector<std::string> categories;
  std::vector<BarSeries> series;
  double y_max = 1.0;
  std::optional<double> reference_line;  // horizontal dashed line
};

// Grouped bar chart as a standalone SVG document.
std::string render_svg(const BarChart& chart);

// "NA" for nullopt, otherwise fixed with 6 decimals.
std::string format_value(const std::optional<double>& v);

// Writes report/<kind>.tsv and report/<kind>.svg for each of consistency,
// background, bias, breakdown_relation and breakdown_concept. Returns the
// written paths relative to run_dir, sorted. Throws DataError naming the
// metrics stage when metrics.json is absent.
std::vector<std::filesystem::path> write_report(const std::filesystem::path& run_dir);

// Same, from an in-memory metrics document.
std::vector<std::filesystem::path> write_report(const nlohmann::json& metrics,
                                                const std::filesystem::path& run_dir);

}  // namespace ccprobe
