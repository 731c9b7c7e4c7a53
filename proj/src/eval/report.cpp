#include "guided/eval/report.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include <fmt/format.h>

#include "guided/error.hpp"
#include "guided/text.hpp"

namespace guided::eval {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<std::string_view, std::string_view>, 9> kRowTitles{{
    {"text_instruction", "Text Instruction"},
    {"visual_type", "Visual Type"},
    {"key_component", "Key Component"},
    {"highlight", "Highlight"},
    {"movement", "Movement"},
    {"hand_gesture", "Hand Gesture"},
    {"tool", "Tool"},
    {"widget", "Widget"},
    {"total", "Total"},
}};

constexpr std::array<std::string_view, 3> kPlanKeys{"text_instruction", "visual_type", "key_component"};
constexpr std::array<std::string_view, 5> kTypeKeys{"highlight", "movement", "hand_gesture", "tool", "widget"};

std::string_view type_key(plan::VisualType t) { return kTypeKeys[static_cast<std::size_t>(plan::visual_type_code(t) - 1)]; }

struct Mean {
  double sum = 0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  std::optional<double> value() const { return n == 0 ? std::nullopt : std::optional<double>(sum / static_cast<double>(n)); }
};

// Shortest text that parses back to the same double.
std::string exact(double v) { return fmt::format("{}", v); }

std::string latency_cell(const LatencyRow& r) {
  std::string out = r.mean_latency_s ? fmt::format("{:.2f}", *r.mean_latency_s) : "-";
  if (r.generated_latency_s) out += fmt::format(" ({:.2f} w/ gen)", *r.generated_latency_s);
  return out;
}

std::size_t category_total(const MetricsReport& r, Category c) {
  for (const auto& row : r.latency_rows) {
    if (row.category == c && !row.component) return row.total;
  }
  return 0;
}

std::string latency_label(const MetricsReport& r, const LatencyRow& row) {
  if (!row.component) return std::string(category_title(row.category));
  std::string label = fmt::format("  {}", component_title(*row.component));
  // A component scored on a subset of the category's steps shows its N.
  if (row.total < category_total(r, row.category)) label += fmt::format(" (N={})", row.total);
  return label;
}

void render_text(std::ostringstream& os, const MetricsReport& r, bool include_latency) {
  const std::string rule(60, '-');
  const auto count_line = [&](const CountRow& row) {
    os << fmt::format("{:<22}{:>12}{:>14}{:>12}\n", row_title(row.key), row.total, row.correct,
                      format_percent(row.correct, row.total, 1));
  };
  os << "Plan and guidance accuracy\n";
  os << fmt::format("{:<22}{:>12}{:>14}{:>12}\n", "", "Total Steps", "Correct Steps", "Percentage");
  os << rule << '\n';
  for (const auto& row : r.plan_rows) count_line(row);
  os << rule << '\n';
  for (const auto& row : r.type_rows) count_line(row);
  os << rule << '\n';
  count_line(r.total);
  os << rule << '\n';

  os << "\nPer-type accuracy and latency\n";
  if (include_latency) {
    os << fmt::format("{:<26}{:>10}  {}\n", "Type / Component", "Accuracy", "Latency (s)");
  } else {
    os << fmt::format("{:<26}{:>10}\n", "Type / Component", "Accuracy");
  }
  os << rule << '\n';
  bool first = true;
  for (const auto& row : r.latency_rows) {
    if (!row.component && !first) os << rule << '\n';
    first = false;
    const std::string label = latency_label(r, row);
    const std::string acc = format_percent(row.correct, row.total, 0);
    if (include_latency) {
      os << fmt::format("{:<26}{:>10}  {}\n", label, acc, latency_cell(row));
    } else {
      os << fmt::format("{:<26}{:>10}\n", label, acc);
    }
  }
  os << rule << '\n';
  if (!include_latency) return;
  // Concurrent provider calls make component latencies sum past the step's.
  for (const Category c : kAllCategories) {
    std::optional<double> step;
    double parts = 0.0;
    for (const auto& row : r.latency_rows) {
      // Generated assets are timed against the generated-path mean instead.
      if (row.category != c || !row.mean_latency_s || row.component == ComponentId::kToolGen) continue;
      if (row.component) {
        parts += *row.mean_latency_s;
      } else {
        step = row.mean_latency_s;
      }
    }
    if (step && parts > *step + 0.005) {
      os << fmt::format("note: {} component latencies sum to {:.2f} s against {:.2f} s per step; {:.2f} s overlapped\n",
                        category_title(c), parts, *step, parts - *step);
    }
  }
}

std::string optional_cell(const std::optional<double>& v) { return v ? exact(*v) : ""; }

void render_csv(std::ostringstream& os, const MetricsReport& r, bool include_latency) {
  os << "section,category,component,total,correct,percentage";
  if (include_latency) os << ",mean_latency_s,generated_latency_s";
  os << '\n';
  const auto pct = [](std::size_t c, std::size_t t) {
    const std::string p = format_percent(c, t, 1);
    return p == "n/a" ? std::string() : p.substr(0, p.size() - 1);
  };
  const auto count_line = [&](std::string_view section, const CountRow& row) {
    os << fmt::format("{},{},,{},{},{}", section, row.key, row.total, row.correct, pct(row.correct, row.total));
    if (include_latency) os << ",,";
    os << '\n';
  };
  for (const auto& row : r.plan_rows) count_line("plan", row);
  for (const auto& row : r.type_rows) count_line("type", row);
  count_line("total", r.total);
  for (const auto& row : r.latency_rows) {
    os << fmt::format("latency,{},{},{},{},{}", category_name(row.category),
                      row.component ? component_name(*row.component) : "", row.total, row.correct,
                      pct(row.correct, row.total));
    if (include_latency) {
      os << ',' << optional_cell(row.mean_latency_s) << ',' << optional_cell(row.generated_latency_s);
    }
    os << '\n';
  }
}

[[noreturn]] void bad_report(const std::string& what) { throw Error(ErrorCode::kParseError, "report: " + what); }

void check_percentage(const json& stated, std::size_t correct, std::size_t total, const std::string& where) {
  const auto expected = percentage(correct, total);
  const bool ok = stated.is_null() ? !expected : (expected && stated.is_number() && stated.get<double>() == *expected);
  if (!ok) bad_report(where + ": percentage does not match correct/total");
}

std::size_t parse_count(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    bad_report(where + ": not a count: '" + s + "'");
  }
}

std::optional<double> parse_optional_double(const std::string& s, const std::string& where) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    bad_report(where + ": not a number: '" + s + "'");
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::string_view row_title(std::string_view key) {
  for (const auto& [k, title] : kRowTitles) {
    if (k == key) return title;
  }
  return key;
}

std::optional<double> percentage(std::size_t correct, std::size_t total) {
  if (total == 0) return std::nullopt;
  const std::size_t tenths = (2000 * correct + total) / (2 * total);
  return static_cast<double>(tenths) / 10.0;
}

std::string format_percent(std::size_t correct, std::size_t total, int decimals) {
  if (total == 0) return "n/a";
  if (decimals <= 0) return fmt::format("{}%", (200 * correct + total) / (2 * total));
  std::size_t scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  const std::size_t units = (200 * scale * correct + total) / (2 * total);
  return fmt::format("{}.{:0{}}%", units / scale, units % scale, decimals);
}

MetricsReport aggregate(std::vector<StepOutcome> outcomes) {
  std::sort(outcomes.begin(), outcomes.end(), [](const StepOutcome& a, const StepOutcome& b) {
    if (a.bundle_id != b.bundle_id) return a.bundle_id < b.bundle_id;
    if (a.step != b.step) return a.step < b.step;
    return outcome_to_json(a).dump() < outcome_to_json(b).dump();
  });

  MetricsReport r;
  for (const auto key : kPlanKeys) r.plan_rows.push_back({std::string(key)});
  for (const auto key : kTypeKeys) r.type_rows.push_back({std::string(key)});
  for (const auto& o : outcomes) {
    const bool fields[] = {o.instruction_correct, o.type_correct, o.component_correct};
    for (std::size_t i = 0; i < 3; ++i) {
      ++r.plan_rows[i].total;
      r.plan_rows[i].correct += fields[i] ? 1 : 0;
    }
    if (o.guidance_correct) {
      auto& row = *std::find_if(r.type_rows.begin(), r.type_rows.end(),
                                [&](const CountRow& c) { return c.key == type_key(o.expected_type); });
      ++row.total;
      row.correct += *o.guidance_correct ? 1 : 0;
    }
    ++r.total.total;
    r.total.correct += o.end_to_end_correct() ? 1 : 0;
  }

  for (const Category c : kAllCategories) {
    LatencyRow row{c};
    Mean plain, generated;
    for (const auto& o : outcomes) {
      if (o.category != c) continue;
      if (o.guidance_correct) {
        ++row.total;
        row.correct += *o.guidance_correct ? 1 : 0;
      }
      if (o.latency_s) (o.generated_tool ? generated : plain).add(*o.latency_s);
    }
    row.mean_latency_s = plain.value();
    row.generated_latency_s = generated.value();
    r.latency_rows.push_back(row);
    for (const ComponentId id : components_of(c)) {
      LatencyRow comp{c, id};
      Mean latency;
      for (const auto& o : outcomes) {
        if (o.category != c) continue;
        const auto* co = o.component(id);
        if (co == nullptr) continue;
        if (co->correct) {
          ++comp.total;
          comp.correct += *co->correct ? 1 : 0;
        }
        if (co->latency_s) latency.add(*co->latency_s);
      }
      comp.mean_latency_s = latency.value();
      r.latency_rows.push_back(comp);
    }
  }
  return r;
}

std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "text") return ReportFormat::kText;
  if (s == "csv") return ReportFormat::kCsv;
  if (s == "json") return ReportFormat::kJson;
  return std::nullopt;
}

json report_to_json(const MetricsReport& r, bool include_latency) {
  const auto count = [](const CountRow& row) {
    const auto p = percentage(row.correct, row.total);
    return json{{"row", row.key}, {"total", row.total}, {"correct", row.correct},
                {"percentage", p ? json(*p) : json(nullptr)}};
  };
  json plan = json::array(), types = json::array(), latency = json::array();
  for (const auto& row : r.plan_rows) plan.push_back(count(row));
  for (const auto& row : r.type_rows) types.push_back(count(row));
  for (const auto& row : r.latency_rows) {
    const auto p = percentage(row.correct, row.total);
    json j{{"category", category_name(row.category)},
           {"component", row.component ? json(component_name(*row.component)) : json(nullptr)},
           {"total", row.total},
           {"correct", row.correct},
           {"percentage", p ? json(*p) : json(nullptr)}};
    if (include_latency) {
      j["mean_latency_s"] = row.mean_latency_s ? json(*row.mean_latency_s) : json(nullptr);
      j["generated_latency_s"] = row.generated_latency_s ? json(*row.generated_latency_s) : json(nullptr);
    }
    latency.push_back(std::move(j));
  }
  return {{"format", "guided.metrics/1"}, {"plan", std::move(plan)}, {"types", std::move(types)},
          {"total", count(r.total)},      {"latency", std::move(latency)}};
}

MetricsReport report_from_json(const json& doc) {
  try {
    if (doc.at("format") != "guided.metrics/1") bad_report("format is not guided.metrics/1");
    const auto count = [](const json& j, const std::string& where) {
      CountRow row{j.at("row").get<std::string>(), j.at("total").get<std::size_t>(), j.at("correct").get<std::size_t>()};
      check_percentage(j.at("percentage"), row.correct, row.total, where);
      return row;
    };
    MetricsReport r;
    for (const auto& j : doc.at("plan")) r.plan_rows.push_back(count(j, "plan"));
    for (const auto& j : doc.at("types")) r.type_rows.push_back(count(j, "types"));
    r.total = count(doc.at("total"), "total");
    for (const auto& j : doc.at("latency")) {
      const auto c = parse_category(j.at("category").get<std::string>());
      if (!c) bad_report("unknown category " + j.at("category").dump());
      LatencyRow row{*c};
      if (!j.at("component").is_null()) {
        row.component = parse_component(j.at("component").get<std::string>());
        if (!row.component) bad_report("unknown component " + j.at("component").dump());
      }
      row.total = j.at("total").get<std::size_t>();
      row.correct = j.at("correct").get<std::size_t>();
      check_percentage(j.at("percentage"), row.correct, row.total, "latency");
      if (j.contains("mean_latency_s") && !j.at("mean_latency_s").is_null()) {
        row.mean_latency_s = j.at("mean_latency_s").get<double>();
      }
      if (j.contains("generated_latency_s") && !j.at("generated_latency_s").is_null()) {
        row.generated_latency_s = j.at("generated_latency_s").get<double>();
      }
      r.latency_rows.push_back(row);
    }
    return r;
  } catch (const json::exception& e) {
    bad_report(e.what());
  }
}

MetricsReport report_from_csv(std::string_view csv) {
  std::istringstream is{std::string(csv)};
  std::string line;
  if (!std::getline(is, line)) bad_report("empty csv");
  const auto header = split(line, ',');
  const bool has_latency = header.size() == 8;
  if (header.size() != 6 && !has_latency) bad_report("unexpected csv header");
  MetricsReport r;
  bool have_total = false;
  std::size_t n = 1;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    const std::string where = fmt::format("csv line {}", n);
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) bad_report(where + ": wrong cell count");
    const std::size_t total = parse_count(cells[3], where);
    const std::size_t correct = parse_count(cells[4], where);
    const auto stated = parse_optional_double(cells[5], where);
    check_percentage(stated ? json(*stated) : json(nullptr), correct, total, where);
    const std::string& section = cells[0];
    if (section == "plan" || section == "type" || section == "total") {
      CountRow row{cells[1], total, correct};
      if (section == "plan") {
        r.plan_rows.push_back(row);
      } else if (section == "type") {
        r.type_rows.push_back(row);
      } else {
        r.total = row;
        have_total = true;
      }
    } else if (section == "latency") {
      const auto c = parse_category(cells[1]);
      if (!c) bad_report(where + ": unknown category " + cells[1]);
      LatencyRow row{*c};
      if (!cells[2].empty()) {
        row.component = parse_component(cells[2]);
        if (!row.component) bad_report(where + ": unknown component " + cells[2]);
      }
      row.total = total;
      row.correct = correct;
      if (has_latency) {
        row.mean_latency_s = parse_optional_double(cells[6], where);
        row.generated_latency_s = parse_optional_double(cells[7], where);
      }
      r.latency_rows.push_back(row);
    } else {
      bad_report(where + ": unknown section " + section);
    }
  }
  if (!have_total) bad_report("csv has no total row");
  return r;
}

std::string render_report(const MetricsReport& r, ReportFormat format, bool include_latency) {
  std::ostringstream os;
  switch (format) {
    case ReportFormat::kText: render_text(os, r, include_latency); break;
    case ReportFormat::kCsv: render_csv(os, r, include_latency); break;
    case ReportFormat::kJson: os << report_to_json(r, include_latency).dump(2) << '\n'; break;
  }
  return os.str();
}

void write_report(const std::filesystem::path& path, const MetricsReport& r, ReportFormat format) {
  text::write_file(path.string(), render_report(r, format));
}

}  // namespace guided::eval
