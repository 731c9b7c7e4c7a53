#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "guided/eval/outcome.hpp"

namespace guided::eval {

// Percentages are never stored; they are derived from (correct, total).
struct CountRow {
  std::string key;  // "text_instruction", "highlight", "total", ...
  std::size_t total = 0;
  std::size_t correct = 0;
  friend bool operator==(const CountRow&, const CountRow&) = default;
};

struct LatencyRow {
  Category category = Category::kHighlight;
  std::optional<ComponentId> component;  // nullopt: the category's own row
  std::size_t total = 0;
  std::size_t correct = 0;
  std::optional<double> mean_latency_s;
  std::optional<double> generated_latency_s;  // tool steps that needed a generated asset
  friend bool operator==(const LatencyRow&, const LatencyRow&) = default;
};

struct MetricsReport {
  std::vector<CountRow> plan_rows;  // text_instruction, visual_type, key_component
  std::vector<CountRow> type_rows;  // highlight, movement, hand_gesture, tool, widget
  CountRow total{"total"};
  std::vector<LatencyRow> latency_rows;
  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

// Pure fold over the outcomes, independent of their order.
//   plan rows:    every step, correct = that field
//   type rows:    assessed steps (guidance verdict present) by expected type
//   total:        every step, correct = plan fields and guidance correct
//   latency rows: per category and component, assessed entries only
MetricsReport aggregate(std::vector<StepOutcome> outcomes);

std::string_view row_title(std::string_view key);  // "Text Instruction"

// 100 * correct / total rounded half up to `decimals`; "n/a" when total = 0.
std::string format_percent(std::size_t correct, std::size_t total, int decimals);
std::optional<double> percentage(std::size_t correct, std::size_t total);  // one decimal

enum class ReportFormat { kText, kCsv, kJson };
std::optional<ReportFormat> parse_report_format(std::string_view s);  // "text", "csv", "json"

// Deterministic bytes for a report. Without latency the output holds only
// counts, for byte comparison across runs.
std::string render_report(const MetricsReport& r, ReportFormat format, bool include_latency = true);
nlohmann::json report_to_json(const MetricsReport& r, bool include_latency = true);
MetricsReport report_from_json(const nlohmann::json& doc);
MetricsReport report_from_csv(std::string_view csv);
void write_report(const std::filesystem::path& path, const MetricsReport& r, ReportFormat format);

}  // namespace guided::eval
