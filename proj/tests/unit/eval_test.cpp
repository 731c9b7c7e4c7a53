#include <algorithm>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "guided/error.hpp"
#include "guided/eval/replay.hpp"
#include "guided/eval/report.hpp"
#include "guided/text.hpp"
#include "guided/vision/mock.hpp"

namespace fs = std::filesystem;
using namespace guided;
using namespace guided::eval;
using nlohmann::json;

namespace {

const fs::path kFixtures = GUIDED_FIXTURE_DIR;
const fs::path kData = GUIDED_DATA_DIR;

json read_json(const fs::path& p) { return json::parse(text::read_file(p.string())); }

// Whitespace runs collapsed to one space.
std::string squeeze(const std::string& line) {
  std::istringstream is(line);
  std::string word, out;
  while (is >> word) out += (out.empty() ? "" : " ") + word;
  return out;
}

std::vector<std::string> squeezed_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) out.push_back(squeeze(line));
  return out;
}

bool has_line(const std::string& text, const std::string& want) {
  const auto lines = squeezed_lines(text);
  return std::find(lines.begin(), lines.end(), want) != lines.end();
}

const CountRow& row(const MetricsReport& r, std::string_view key) {
  for (const auto* rows : {&r.plan_rows, &r.type_rows}) {
    for (const auto& c : *rows) {
      if (c.key == key) return c;
    }
  }
  return r.total;
}

const LatencyRow& latency_row(const MetricsReport& r, Category c, std::optional<ComponentId> id = std::nullopt) {
  for (const auto& l : r.latency_rows) {
    if (l.category == c && l.component == id) return l;
  }
  throw std::runtime_error("no latency row");
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / fmt::format("guided-eval-{}-{}", tag, std::random_device{}());
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

fs::path copy_bundle(const std::string& name, const TempDir& tmp) {
  const fs::path dst = tmp.path / name;
  fs::copy(kFixtures / "bundles" / name, dst, fs::copy_options::recursive);
  return dst;
}

void edit_json(const fs::path& p, const std::function<void(json&)>& f) {
  json j = read_json(p);
  f(j);
  text::write_file(p.string(), j.dump(2));
}

}  // namespace

// Plan and type accuracy -----------------------------------------------------

TEST(Aggregate, PlanAccuracyFixtureRows) {
  const auto report = aggregate(load_outcomes(kFixtures / "outcomes" / "plan_accuracy.json"));
  const std::string text = render_report(report, ReportFormat::kText);
  for (const char* want : {"Text Instruction 100 96 96.0%", "Visual Type 100 90 90.0%", "Key Component 100 97 97.0%",
                           "Highlight 40 32 80.0%", "Movement 20 17 85.0%", "Hand Gesture 14 11 78.6%",
                           "Tool 4 3 75.0%", "Widget 5 5 100.0%", "Total 100 65 65.0%"}) {
    EXPECT_TRUE(has_line(text, want)) << want << "\n" << text;
  }
}

// Counts recomputed straight from the outcome documents, without the fold.
TEST(Aggregate, PlanAccuracyMatchesIndependentCount) {
  const json doc = read_json(kFixtures / "outcomes" / "plan_accuracy.json");
  std::map<std::string, std::pair<std::size_t, std::size_t>> want;
  const char* type_keys[] = {"", "highlight", "movement", "hand_gesture", "tool", "widget"};
  for (const auto& o : doc.at("outcomes")) {
    const bool text_ok = o.at("instruction_correct"), type_ok = o.at("type_correct"),
               comp_ok = o.at("component_correct");
    auto bump = [&](const std::string& k, bool ok) {
      want[k].first += 1;
      want[k].second += ok ? 1 : 0;
    };
    bump("text_instruction", text_ok);
    bump("visual_type", type_ok);
    bump("key_component", comp_ok);
    const bool assessed = !o.at("guidance_correct").is_null();
    const bool guidance_ok = assessed && o.at("guidance_correct").get<bool>();
    if (assessed) bump(type_keys[o.at("expected_type").get<int>()], guidance_ok);
    bump("total", text_ok && type_ok && comp_ok && guidance_ok);
  }
  const auto report = aggregate(outcomes_from_json(doc));
  for (const auto& [key, counts] : want) {
    EXPECT_EQ(row(report, key).total, counts.first) << key;
    EXPECT_EQ(row(report, key).correct, counts.second) << key;
  }
}

TEST(Aggregate, PlanAccuracyRowOrderAndRules) {
  const auto report = aggregate(load_outcomes(kFixtures / "outcomes" / "plan_accuracy.json"));
  const auto lines = squeezed_lines(render_report(report, ReportFormat::kText));
  std::vector<std::string> firsts;
  for (const auto& l : lines) {
    if (l.rfind("---", 0) == 0) {
      firsts.push_back("|");
    } else if (!l.empty() && l.back() == '%') {
      firsts.push_back(l.substr(0, l.find(' ')));
    }
  }
  // Plan fields, midrule, per-type rows, midrule, total.
  const std::vector<std::string> want = {"|", "Text", "Visual", "Key", "|", "Highlight", "Movement", "Hand",
                                         "Tool", "Widget", "|", "Total", "|"};
  ASSERT_GE(firsts.size(), want.size());
  EXPECT_EQ(std::vector<std::string>(firsts.begin(), firsts.begin() + static_cast<long>(want.size())), want);
}

// Per-type accuracy and latency ----------------------------------------------

TEST(Aggregate, TypeLatencyTypeAccuracyAndLatency) {
  const auto report = aggregate(load_outcomes(kFixtures / "outcomes" / "type_latency.json"));
  const std::pair<Category, const char*> acc[] = {
      {Category::kHighlight, "90%"}, {Category::kTranslation, "80%"}, {Category::kRotation, "70%"},
      {Category::kGesture, "75%"},   {Category::kTool, "75%"},        {Category::kWidget, "100%"}};
  for (const auto& [c, pct] : acc) {
    const auto& r = latency_row(report, c);
    EXPECT_EQ(format_percent(r.correct, r.total, 0), pct) << category_name(c);
  }
  EXPECT_NEAR(*latency_row(report, Category::kHighlight).mean_latency_s, 3.29, 0.005);
  EXPECT_NEAR(*latency_row(report, Category::kTranslation).mean_latency_s, 4.03, 0.005);
  EXPECT_NEAR(*latency_row(report, Category::kRotation).mean_latency_s, 4.09, 0.005);
  EXPECT_NEAR(*latency_row(report, Category::kGesture).mean_latency_s, 3.31, 0.005);
  EXPECT_NEAR(*latency_row(report, Category::kTool).mean_latency_s, 3.29, 0.005);
  EXPECT_NEAR(*latency_row(report, Category::kTool).generated_latency_s, 29.23, 0.005);
  EXPECT_NEAR(*latency_row(report, Category::kWidget).mean_latency_s, 3.30, 0.005);
  EXPECT_NEAR(*latency_row(report, Category::kRotation, ComponentId::kRotationInfo).mean_latency_s, 2.41, 0.005);
  const auto& gen = latency_row(report, Category::kTool, ComponentId::kToolGen);
  EXPECT_EQ(gen.total, 3u);
  EXPECT_EQ(gen.correct, 1u);
}

TEST(Aggregate, TypeLatencyTextShowsOverlapAndSubsetN) {
  const auto text = render_report(aggregate(load_outcomes(kFixtures / "outcomes" / "type_latency.json")), ReportFormat::kText);
  EXPECT_TRUE(has_line(text, "Tool 75% 3.29 (29.23 w/ gen)")) << text;
  EXPECT_TRUE(has_line(text, "Tool Gen (N=3) 33% 23.80")) << text;
  EXPECT_NE(text.find("note: Rotational Movement component latencies sum to 6.24 s against 4.09 s"), std::string::npos)
      << text;
  EXPECT_EQ(text.find("note: Tool"), std::string::npos);
}

// Report invariants ---------------------------------------------------------

TEST(Aggregate, EmptyBucketIsNotApplicable) {
  auto outcomes = load_outcomes(kFixtures / "outcomes" / "plan_accuracy.json");
  std::erase_if(outcomes, [](const StepOutcome& o) { return o.expected_type == plan::VisualType::kWidget; });
  const auto report = aggregate(outcomes);
  EXPECT_EQ(row(report, "widget").total, 0u);
  EXPECT_EQ(row(report, "widget").correct, 0u);
  EXPECT_FALSE(percentage(0, 0).has_value());
  EXPECT_TRUE(has_line(render_report(report, ReportFormat::kText), "Widget 0 0 n/a"));
  EXPECT_EQ(report_to_json(report).at("types")[4].at("percentage"), nullptr);
}

TEST(Aggregate, OrderIndependent) {
  auto outcomes = load_outcomes(kFixtures / "outcomes" / "plan_accuracy.json");
  auto more = load_outcomes(kFixtures / "outcomes" / "type_latency.json");
  outcomes.insert(outcomes.end(), more.begin(), more.end());
  const std::string want = render_report(aggregate(outcomes), ReportFormat::kCsv);
  std::mt19937 rng(7);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(outcomes.begin(), outcomes.end(), rng);
    EXPECT_EQ(render_report(aggregate(outcomes), ReportFormat::kCsv), want);
  }
}

TEST(Aggregate, PercentRoundsHalfUp) {
  EXPECT_EQ(format_percent(1, 16, 1), "6.3%");   // 6.25
  EXPECT_EQ(format_percent(1, 8, 1), "12.5%");
  EXPECT_EQ(format_percent(11, 14, 1), "78.6%");
  EXPECT_EQ(format_percent(1, 3, 0), "33%");
  EXPECT_EQ(format_percent(1, 200, 0), "1%");    // 0.5
  EXPECT_EQ(*percentage(2, 3), 66.7);
  for (std::size_t t = 1; t <= 120; ++t) {
    for (std::size_t c = 0; c <= t; ++c) {
      const double p = *percentage(c, t);
      EXPECT_LE(std::abs(p - 100.0 * static_cast<double>(c) / static_cast<double>(t)), 0.05 + 1e-9);
    }
  }
}

TEST(Report, CsvRoundTrip) {
  for (const char* f : {"plan_accuracy.json", "type_latency.json"}) {
    const auto report = aggregate(load_outcomes(kFixtures / "outcomes" / f));
    EXPECT_EQ(report_from_csv(render_report(report, ReportFormat::kCsv)), report) << f;
  }
}

TEST(Report, JsonRoundTrip) {
  for (const char* f : {"plan_accuracy.json", "type_latency.json"}) {
    const auto report = aggregate(load_outcomes(kFixtures / "outcomes" / f));
    const auto bytes = render_report(report, ReportFormat::kJson);
    EXPECT_EQ(report_from_json(json::parse(bytes)), report) << f;
  }
}

TEST(Report, StatedPercentageMustMatchCounts) {
  const auto report = aggregate(load_outcomes(kFixtures / "outcomes" / "plan_accuracy.json"));
  std::string csv = render_report(report, ReportFormat::kCsv);
  const auto at = csv.find("type,highlight,,40,32,80.0");
  ASSERT_NE(at, std::string::npos) << csv;
  csv.replace(at, std::string("type,highlight,,40,32,80.0").size(), "type,highlight,,40,32,81.0");
  try {
    report_from_csv(csv);
    FAIL() << "tampered percentage accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
  }
  json doc = report_to_json(report);
  doc["total"]["percentage"] = 66.0;
  EXPECT_THROW(report_from_json(doc), Error);
}

TEST(Report, DeterministicBytes) {
  const auto report = aggregate(load_outcomes(kFixtures / "outcomes" / "type_latency.json"));
  for (const auto f : {ReportFormat::kText, ReportFormat::kCsv, ReportFormat::kJson}) {
    EXPECT_EQ(render_report(report, f), render_report(aggregate(load_outcomes(kFixtures / "outcomes" / "type_latency.json")), f));
  }
  TempDir tmp("write");
  write_report(tmp.path / "r.csv", report, ReportFormat::kCsv);
  EXPECT_EQ(text::read_file((tmp.path / "r.csv").string()), render_report(report, ReportFormat::kCsv));
  EXPECT_THROW(write_report(tmp.path / "missing" / "dir" / "r.csv", report, ReportFormat::kCsv), Error);
}

TEST(Outcomes, JsonRoundTripAndFormatCheck) {
  const auto outcomes = load_outcomes(kFixtures / "outcomes" / "type_latency.json");
  EXPECT_EQ(outcomes_from_json(outcomes_to_json(outcomes)), outcomes);
  json bad = outcomes_to_json(outcomes);
  bad["format"] = "guided.outcomes/0";
  EXPECT_THROW(outcomes_from_json(bad), Error);
  bad = outcomes_to_json(outcomes);
  bad["outcomes"][3].erase("category");
  try {
    outcomes_from_json(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBundleFormat);
    EXPECT_NE(std::string(e.what()).find("category"), std::string::npos) << e.what();
  }
}

// Bundles -------------------------------------------------------------------

TEST(Bundle, LoadsGoldenBundles) {
  const auto bundles = FixtureBundle::load_all(kFixtures / "bundles");
  ASSERT_EQ(bundles.size(), 3u);
  EXPECT_EQ(bundles[0].bundle_id(), "kitchen");
  EXPECT_EQ(bundles[1].bundle_id(), "office-printer-clean");
  EXPECT_EQ(bundles[2].bundle_id(), "printer-reset");
  for (const auto& b : bundles) {
    EXPECT_EQ(b.labels().size(), b.step_scenes().size());
    EXPECT_EQ(b.labels().size(), b.plan_document().at("instructions").size());
  }
  EXPECT_EQ(bundles[2].query(), "how to clean the 3D printer from this stage");
}

TEST(Bundle, FormatErrorsNameFileAndField) {
  TempDir tmp("format");
  const fs::path dir = copy_bundle("printer-reset", tmp);
  edit_json(dir / "labels.json", [](json& j) { j["steps"][2]["expected_visual_type"] = 9; });
  try {
    FixtureBundle::load(dir);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBundleFormat);
    const std::string what = e.what();
    EXPECT_NE(what.find("labels.json"), std::string::npos) << what;
    EXPECT_NE(what.find("steps[2].expected_visual_type"), std::string::npos) << what;
  }
  edit_json(dir / "labels.json", [](json& j) {
    j["steps"][2]["expected_visual_type"] = 4;
    j["steps"].erase(7);
  });
  try {
    FixtureBundle::load(dir);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("7 labels for 8 plan steps"), std::string::npos) << e.what();
  }
  fs::remove(dir / "bundle.json");
  EXPECT_THROW(FixtureBundle::load(dir), Error);
}

// Replay --------------------------------------------------------------------

TEST(Replay, PrinterResetCompilesEveryStep) {
  const auto bundle = FixtureBundle::load(kFixtures / "bundles" / "printer-reset");
  const auto result = replay(bundle, {});
  ASSERT_TRUE(result.plan) << result.plan_error.value_or("");
  ASSERT_EQ(result.steps.size(), 8u);
  std::vector<std::string> categories;
  for (const auto& s : result.steps) {
    EXPECT_TRUE(s.compiled.has_value()) << s.outcome.step << ": " << s.outcome.error.value_or("");
    categories.push_back(guidance_category(s.outcome.kinds));
  }
  const std::vector<std::string> caption = {"highlight", "tool",   "movement", "highlight",
                                            "widget",    "highlight", "gesture"};
  EXPECT_EQ(std::vector<std::string>(categories.begin() + 1, categories.end()), caption);
}

TEST(Replay, MockIsDeterministic) {
  const auto bundles = FixtureBundle::load_all(kFixtures / "bundles");
  const auto run = [&] {
    std::vector<StepOutcome> all;
    for (const auto& r : replay_all(bundles, {})) {
      for (auto& o : r.outcomes()) all.push_back(std::move(o));
    }
    return all;
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(outcomes_to_json(a, false).dump(), outcomes_to_json(b, false).dump());
  EXPECT_EQ(render_report(aggregate(a), ReportFormat::kCsv, false), render_report(aggregate(b), ReportFormat::kCsv, false));
  EXPECT_EQ(render_report(aggregate(a), ReportFormat::kText, false), render_report(aggregate(b), ReportFormat::kText, false));
  // Latencies are still recorded, just not compared.
  for (const auto& o : a) {
    if (o.guidance_correct) EXPECT_TRUE(o.latency_s.has_value()) << o.bundle_id << "/" << o.step;
  }
}

TEST(Replay, MislabeledTypeMovesOnlyVisualTypeRow) {
  TempDir tmp("mislabel");
  const fs::path dir = copy_bundle("printer-reset", tmp);
  const auto base = aggregate(replay(FixtureBundle::load(dir), {}).outcomes());
  // Step 4 highlights the knob; label it as a widget step instead.
  edit_json(dir / "labels.json", [](json& j) { j["steps"][4]["expected_visual_type"] = 5; });
  const auto outcomes = replay(FixtureBundle::load(dir), {}).outcomes();
  const auto changed = aggregate(outcomes);
  EXPECT_EQ(row(changed, "visual_type").correct, row(base, "visual_type").correct - 1);
  EXPECT_EQ(row(changed, "text_instruction"), row(base, "text_instruction"));
  EXPECT_EQ(row(changed, "key_component"), row(base, "key_component"));
  EXPECT_FALSE(outcomes[4].type_correct);
  EXPECT_TRUE(outcomes[4].instruction_correct);
  EXPECT_TRUE(outcomes[4].component_correct);
  EXPECT_EQ(outcomes[4].guidance_correct, std::optional<bool>(true));
  // The end-to-end row is the conjunction, so it follows.
  EXPECT_EQ(changed.total.correct, base.total.correct - 1);
}

TEST(Replay, LiveWithoutKeysFailsBeforeReplay) {
  const auto bundle = FixtureBundle::load(kFixtures / "bundles" / "printer-reset");
  ReplayOptions options;
  options.mode = ReplayMode::kLive;
  try {
    replay(bundle, options);
    FAIL() << "live replay without a config";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError);
  }
  options.provider_config = kData / "config" / "providers.example.json";
  options.env = [](const std::string&) { return std::optional<std::string>(); };
  try {
    replay_all({bundle}, options);
    FAIL() << "live replay without keys";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError);
  }
  EXPECT_EQ(parse_replay_mode("live"), ReplayMode::kLive);
  EXPECT_FALSE(parse_replay_mode("recorded"));
}

TEST(Replay, WrongBoxFailsBoxComponent) {
  TempDir tmp("wrongbox");
  const fs::path dir = copy_bundle("printer-reset", tmp);
  edit_json(dir / "provider" / "index.json", [](json& j) {
    json& entries = j.is_array() ? j : j["entries"];
    for (auto& e : entries) {
      if (e.value("component", "") == "The orange control knob below the display") {
        e["text"] = "{name: knob, pos: [20, 20, 100, 100]}";
      }
    }
  });
  const auto outcomes = replay(FixtureBundle::load(dir), {}).outcomes();
  for (const std::size_t i : {4u, 6u}) {
    const auto* box = outcomes[i].component(ComponentId::kBox);
    ASSERT_NE(box, nullptr);
    EXPECT_EQ(box->correct, std::optional<bool>(false)) << i;
  }
  EXPECT_EQ(outcomes[1].component(ComponentId::kBox)->correct, std::optional<bool>(true));
}

TEST(Replay, ComponentVerdictsOnGoldenBundles) {
  for (const auto& r : replay_all(FixtureBundle::load_all(kFixtures / "bundles"), {})) {
    for (const auto& s : r.steps) {
      for (const auto& c : s.outcome.components) {
        if (c.id == ComponentId::kPlacement) {
          EXPECT_FALSE(c.correct.has_value());
        } else if (c.id == ComponentId::kToolGen) {
          EXPECT_EQ(c.correct.has_value(), s.outcome.generated_tool);
        } else {
          EXPECT_EQ(c.correct, std::optional<bool>(true)) << r.bundle_id << "/" << s.outcome.step << " "
                                                          << component_name(c.id);
        }
      }
    }
  }
}

TEST(Replay, GeneratedToolIsFlagged) {
  const auto r = replay(FixtureBundle::load(kFixtures / "bundles" / "kitchen"), {});
  ASSERT_EQ(r.steps.size(), 7u);
  EXPECT_TRUE(r.steps[6].outcome.generated_tool);
  EXPECT_FALSE(r.steps[3].outcome.generated_tool);
}

// Fixture grounding ---------------------------------------------------------

class FixtureGrounding : public ::testing::Test {
 protected:
  static vision::VisionGateway gateway_for(const FixtureBundle& b) {
    vision::GatewayConfig config;
    config.eval_mode = true;
    return vision::VisionGateway(vision::MockBackend::load(b.provider_dir()), config);
  }
  static json expected(const std::string& bundle, std::size_t step) {
    return read_json(kFixtures / "bundles" / bundle / "labels.json").at("steps").at(step).at("expected");
  }
};

TEST_F(FixtureGrounding, OrangeStartButtonBox) {
  const auto b = FixtureBundle::load(kFixtures / "bundles" / "kitchen");
  auto gw = gateway_for(b);
  const auto scene = b.scene(b.step_scenes()[0]);
  const auto r = gw.request_bounding_box({scene->id, &scene->image}, "The orange Start button");
  const auto want = expected("kitchen", 0).at("box").get<std::vector<double>>();
  EXPECT_EQ(r.box, (geometry::BoundingBox2D{want[0], want[1], want[2], want[3]}));
  EXPECT_EQ(r.box, (geometry::BoundingBox2D{412, 655, 450, 710}));
}

TEST_F(FixtureGrounding, PrinterBedTarget) {
  const auto b = FixtureBundle::load(kFixtures / "bundles" / "printer-reset");
  auto gw = gateway_for(b);
  const auto scene = b.scene(b.step_scenes()[3]);
  const auto r = gw.request_translation_target({scene->id, &scene->image}, "printer bed",
                                               "move the print bed back to the center");
  const auto t = expected("printer-reset", 3).at("target").get<std::vector<double>>();
  EXPECT_NEAR(r.target.x(), t[0], 1e-9);
  EXPECT_NEAR(r.target.y(), t[1], 1e-9);
  // Right of the bed's current centre, same height.
  EXPECT_GT(r.target.x(), r.box.center().x());
  EXPECT_NEAR(r.target.y(), r.box.center().y(), 1e-9);
}

TEST_F(FixtureGrounding, ToasterDoorRotation) {
  const auto b = FixtureBundle::load(kFixtures / "bundles" / "kitchen");
  auto gw = gateway_for(b);
  const auto initial = b.scene(b.initial_scene());
  const auto current = b.scene(b.step_scenes()[2]);
  const auto r = gw.request_rotation_info({initial->id, &initial->image}, {current->id, &current->image},
                                          "The glass door of the toaster oven", "open the toaster oven door");
  EXPECT_EQ(vision::axis_name(r.axis), "x");
  EXPECT_EQ(vision::direction_name(r.direction), "CCW");
}

TEST_F(FixtureGrounding, FeederMaskCoverage) {
  const auto b = FixtureBundle::load(kFixtures / "bundles" / "office-printer-clean");
  auto gw = gateway_for(b);
  const auto scene = b.scene(b.step_scenes()[1]);
  const auto want = expected("office-printer-clean", 1).at("box").get<std::vector<double>>();
  const geometry::BoundingBox2D box{want[0], want[1], want[2], want[3]};
  const auto mask = gw.request_segmentation({scene->id, &scene->image}, box);
  const auto rect = geometry::pixel_rect(box, scene->image.width, scene->image.height);
  EXPECT_EQ(mask.width, rect.width);
  EXPECT_EQ(mask.height, rect.height);
  EXPECT_GE(mask.coverage(), 0.30);
}

TEST_F(FixtureGrounding, SinglePixelMask) {
  const auto b = FixtureBundle::load(kFixtures / "bundles" / "kitchen");
  auto gw = gateway_for(b);
  const auto scene = b.scene(b.step_scenes()[0]);
  const auto mask = gw.request_segmentation({scene->id, &scene->image}, {100, 100, 101, 101});
  EXPECT_EQ(mask.width, 1);
  EXPECT_EQ(mask.height, 1);
  EXPECT_EQ(mask.count(), 1u);
}

// Sessions over bundles -----------------------------------------------------

TEST(BundleSession, PrinterResetQueryThenAdvances) {
  const auto bundle = FixtureBundle::load(kFixtures / "bundles" / "printer-reset");
  const auto messages = run_session(bundle);
  ASSERT_GE(messages.size(), 2u);
  EXPECT_EQ(messages[0].kind, session::MessageKind::kPlanReady);
  EXPECT_EQ(messages[0].session_id, "session-1");
  const auto kinds = transcript_kinds(messages);
  ASSERT_EQ(kinds.size(), 8u);
  std::vector<std::string> categories;
  for (const auto& k : kinds) categories.push_back(guidance_category(k));
  const std::vector<std::string> want = {"highlight", "highlight", "tool",      "movement",
                                         "highlight", "widget",    "highlight", "gesture"};
  EXPECT_EQ(categories, want);
  // Same bytes on a second run, timings aside.
  EXPECT_EQ(transcript_json(messages).dump(), transcript_json(run_session(bundle)).dump());
}

TEST(BundleSession, OfficePrinterCaptionSequence) {
  const auto bundle = FixtureBundle::load(kFixtures / "bundles" / "office-printer-clean");
  const auto kinds = transcript_kinds(run_session(bundle));
  ASSERT_EQ(kinds.size(), 8u);
  std::vector<std::string> categories;
  for (std::size_t i = 1; i < kinds.size(); ++i) categories.push_back(guidance_category(kinds[i]));
  const std::vector<std::string> want = {"movement", "tool",     "gesture", "tool",
                                         "highlight", "movement", "widget"};
  EXPECT_EQ(categories, want);
}
