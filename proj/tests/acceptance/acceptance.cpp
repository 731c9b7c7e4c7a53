// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Geometry>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "guided/error.hpp"
#include "guided/eval/replay.hpp"
#include "guided/eval/report.hpp"
#include "guided/geometry/surface.hpp"
#include "guided/guidance/compiler.hpp"
#include "guided/guidance/imaging.hpp"
#include "guided/plan/classifier.hpp"
#include "guided/session/relay.hpp"
#include "guided/session/session.hpp"
#include "guided/text.hpp"

namespace fs = std::filesystem;
using namespace guided;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kData = GUIDED_DATA_DIR;
const fs::path kFixtures = GUIDED_FIXTURE_DIR;

struct Verdict {
  bool pass = true;
  std::string detail;
  std::vector<std::string> failures;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    if (failures.size() < 5) failures.push_back(what);
  }
};

struct Criterion {
  std::string name;
  std::optional<double> limit_s;
  std::function<Verdict()> run;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Schema -------------------------------------------------------------------

// The example step objects embedded in the shipped plan prompt, in order.
std::vector<json> prompt_examples() {
  const std::string prompt = text::read_file((kData / "prompts" / "plan.txt").string());
  std::vector<json> out;
  std::size_t at = 0;
  while ((at = prompt.find("\n{\n", at)) != std::string::npos) {
    const auto end = prompt.find("\n}", at);
    out.push_back(json::parse(prompt.substr(at + 1, end - at + 1)));
    at = end;
  }
  return out;
}

std::optional<std::string> first_violation_field(const json& step) {
  try {
    plan::parse_plan_json(json{{"instructions", json::array({step})}});
  } catch (const plan::PlanValidationError& e) {
    return e.violations().empty() ? std::string("?") : e.violations().front().field;
  }
  return std::nullopt;
}

Verdict schema_suite() {
  Verdict v;
  const auto examples = prompt_examples();
  v.require(examples.size() == 5, fmt::format("{} example snippets in the prompt", examples.size()));
  for (std::size_t i = 0; i < examples.size(); ++i) {
    try {
      const auto plan = plan::parse_plan_json(json{{"instructions", json::array({examples[i]})}});
      v.require(plan::visual_type_code(plan.steps.at(0).visual_type()) == static_cast<int>(i) + 1,
                fmt::format("snippet {} has the wrong type", i));
    } catch (const Error& e) {
      v.require(false, fmt::format("snippet {} rejected: {}", i, e.what()));
    }
  }
  if (examples.size() != 5) return v;

  // (mutant, expected first violation field)
  std::vector<std::pair<json, std::string>> mutants;
  const auto with = [&](std::size_t type, const std::function<void(json&)>& f, const std::string& field) {
    json m = examples[type - 1];
    f(m);
    mutants.emplace_back(std::move(m), field);
  };
  // Arity grid: every wrong key_components count from 0 to 4 for each type.
  const std::size_t arity[] = {0, 1, 2, 2, 3, 2};
  for (std::size_t t = 1; t <= 5; ++t) {
    for (std::size_t n = 0; n <= 4; ++n) {
      const bool valid = t == 1 ? n >= 1 : n == arity[t];
      if (valid) continue;
      with(t, [&](json& m) {
        json kc = json::array();
        for (std::size_t i = 0; i < n; ++i) kc.push_back(i < m["key_components"].size() ? m["key_components"][i] : json("extra"));
        m["key_components"] = kc;
      }, "key_components");
    }
  }
  // Visual type outside the enum, on every snippet.
  for (std::size_t t = 1; t <= 5; ++t) {
    for (const int bad : {0, 6, -1, 7, 42}) with(t, [&](json& m) { m["visual_type"] = bad; }, "visual_type");
    with(t, [](json& m) { m["visual_type"] = "1"; }, "visual_type");
    with(t, [](json& m) { m["instruction"] = "   "; }, "instruction");
    with(t, [](json& m) { m["key_components"][0] = " "; }, "key_components[0]");
  }
  // Second-slot enums.
  for (const char* bad : {"sideways", "spin", "lift"}) with(2, [&](json& m) { m["key_components"][1] = bad; }, "key_components[1]");
  for (const char* bad : {"wave", "fist", "thumbs up"}) with(3, [&](json& m) { m["key_components"][1] = bad; }, "key_components[1]");
  for (const char* bad : {"sideways", "diagonal", "zigzag"}) with(4, [&](json& m) { m["key_components"][1] = bad; }, "key_components[1]");
  with(4, [](json& m) { m["key_components"][2] = ""; }, "key_components[2]");
  for (const char* bad : {"30", "thirty", "00:75", "1:2:3"}) with(5, [&](json& m) { m["key_components"][1] = bad; }, "key_components[1]");

  std::size_t rejected = 0;
  for (const auto& [m, field] : mutants) {
    const auto got = first_violation_field(m);
    v.require(got.has_value(), "accepted mutant " + m.dump());
    v.require(!got || *got == field, fmt::format("{} flagged {} not {}", m.dump(), got.value_or("-"), field));
    if (got && *got == field) ++rejected;
  }
  v.require(mutants.size() >= 40, fmt::format("only {} mutants", mutants.size()));
  v.detail = fmt::format("5 snippets valid, {}/{} mutants rejected on the right field", rejected, mutants.size());
  return v;
}

// Classifier ---------------------------------------------------------------

Verdict classifier_suite() {
  Verdict v;
  using plan::classify_visual_type;
  const std::pair<const char*, int> cases[] = {
      {"Let the food stand for 30s", 5},
      {"Mix the ingredients with a whisk", 4},
      {"press start button on the rice cooker", 1},
      {"Pull the filament out", 3},
      {"Return the basket to the air fryer to resume cooking", 2},
  };
  for (const auto& [text, code] : cases) {
    const int got = plan::visual_type_code(classify_visual_type(text).type);
    v.require(got == code, fmt::format("'{}' -> {} not {}", text, got, code));
  }
  // Composite instructions: the earliest category in the fixed order wins.
  const auto& lex = plan::ClassifierLexicons::defaults();
  const std::vector<const std::vector<std::string>*> categories{&lex.waiting, &lex.tool, &lex.gesture, &lex.movement};
  const int expected[] = {5, 4, 3, 2};
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::pair<int, std::string>> parts;
    for (int c = 0; c < 4; ++c) {
      if (rng() % 2 == 0) continue;
      const auto& words = *categories[static_cast<std::size_t>(c)];
      parts.emplace_back(c, words[rng() % words.size()]);
    }
    while (parts.size() < 2) {
      const int c = static_cast<int>(rng() % 4);
      const auto& words = *categories[static_cast<std::size_t>(c)];
      parts.emplace_back(c, words[rng() % words.size()]);
    }
    std::shuffle(parts.begin(), parts.end(), rng);
    std::string instruction = "next";
    int earliest = 4;
    for (const auto& [c, token] : parts) {
      instruction += " " + token + " the panel";
      earliest = std::min(earliest, c);
    }
    const int got = plan::visual_type_code(classify_visual_type(instruction).type);
    v.require(got == expected[earliest], fmt::format("'{}' -> {}", instruction, got));
  }
  v.detail = "(5, 4, 1), gesture 3, movement 2, 200 composites";
  return v;
}

// Geometry -----------------------------------------------------------------

Verdict geometry_suite() {
  using namespace geometry;
  Verdict v;
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> unit(0, 1), sym(-1, 1), f(200, 2000), depth(0.05, 20.0);
  double worst_px = 0;
  for (int i = 0; i < 1000; ++i) {
    CameraIntrinsics k;
    k.width = 640 + static_cast<int>(unit(rng) * 1280);
    k.height = 480 + static_cast<int>(unit(rng) * 960);
    k.fx = f(rng);
    k.fy = f(rng);
    k.cx = unit(rng) * (k.width - 1);
    k.cy = unit(rng) * (k.height - 1);
    Eigen::Quaterniond q(sym(rng), sym(rng), sym(rng), sym(rng));
    q.normalize();
    CameraPose pose;
    pose.rotation = q.toRotationMatrix();
    pose.translation = Vec3{sym(rng) * 3, sym(rng) * 3, sym(rng) * 3};
    const Point2 p{unit(rng) * k.width, unit(rng) * k.height};
    const auto back = project(unproject(p, depth(rng), k, pose), k, pose);
    v.require(back.has_value(), "round trip landed behind the camera");
    if (back) worst_px = std::max(worst_px, (*back - p).norm());
  }
  v.require(worst_px <= 1e-6, fmt::format("round trip error {:.3g} px", worst_px));

  std::uniform_real_distribution<double> coord(-2, 2);
  double worst_n = 0;
  int checked = 0;
  while (checked < 1000) {
    const Point3 bl{coord(rng), coord(rng), coord(rng)}, br{coord(rng), coord(rng), coord(rng)},
        c{coord(rng), coord(rng), coord(rng)};
    const Point3 cam{coord(rng) * 5, coord(rng) * 5, coord(rng) * 5};
    if ((br - bl).cross(c - bl).norm() < 1e-3) continue;
    const Vec3 n = surface_normal(bl, br, c, cam);
    if (std::abs(n.dot(cam - c)) < 1e-9) continue;
    worst_n = std::max({worst_n, std::abs(n.norm() - 1.0), std::abs(n.dot((br - bl).normalized())),
                        std::abs(n.dot((c - bl).normalized()))});
    v.require(n.dot(cam - c) > 0, "normal faces away from the camera");
    ++checked;
  }
  v.require(worst_n <= 1e-9, fmt::format("normal invariant error {:.3g}", worst_n));

  const CameraIntrinsics k{1000, 1000, 320, 240, 640, 480};
  const auto [w, h] = guidance::image_plane_scale({0, 0, 100, 100}, 2.0, k);
  v.require(w == 0.2 && h == 0.2, fmt::format("100 px at 2 m with f=1000 gave {} m", w));
  v.detail = fmt::format("round trip max {:.2g} px, normals max {:.2g}, plane scale {} m", worst_px, worst_n, w);
  return v;
}

// Shared scripted backend: a canned bbox reply, plan on request, full masks.
class ScriptBackend : public vision::VisionBackend {
 public:
  std::string name() const override { return "script"; }
  std::set<vision::Capability> capabilities() const override {
    return {std::begin(vision::kAllCapabilities), std::end(vision::kAllCapabilities)};
  }
  vision::ProviderReply call(const vision::ProviderRequest& r, std::stop_token) override {
    if (r.capability == vision::Capability::kPlan) return {plan, std::nullopt};
    if (r.capability == vision::Capability::kSegmentation) {
      const Image& img = *r.frames.back().image;
      const auto rect = geometry::pixel_rect(*r.box, img.width, img.height);
      return {"", Image(rect.width, rect.height, 1, 255)};
    }
    return {box, std::nullopt};
  }
  std::string plan;
  std::string box = "{name: part, pos: [10, 10, 30, 40]}";
};

std::shared_ptr<vision::VisionGateway> script_gateway(const std::shared_ptr<ScriptBackend>& backend) {
  vision::GatewayConfig cfg;
  cfg.retry.backoff_base_s = 0;
  return std::make_shared<vision::VisionGateway>(backend, cfg);
}

// 5 cm rule ----------------------------------------------------------------

Verdict five_cm_rule() {
  Verdict v;
  // 640x480 wall at 2 m, f = 500: one metre spans 250 px.
  auto snap = std::make_shared<geometry::SceneSnapshot>();
  snap->id = "wall";
  snap->image = Image(640, 480, 3, 128);
  snap->depth = geometry::DepthMap::uniform(160, 120, 2.0f);
  snap->intrinsics = {500, 500, 320, 240, 640, 480};
  auto backend = std::make_shared<ScriptBackend>();
  const guidance::GuidanceCompiler compiler(script_gateway(backend));

  std::vector<double> edges;
  for (int mm = 10; mm <= 49; ++mm) edges.push_back(mm / 1000.0);
  edges.push_back(0.05);
  for (int mm = 51; mm <= 100; ++mm) edges.push_back(mm / 1000.0);
  std::size_t particles = 0, boxes = 0;
  for (const double e : edges) {
    backend->box = fmt::format("{{name: guide, pos: [240, 320, {}, {}]}}", 240 + 0.3 * 250, 320 + e * 250);
    guidance::CompileInput in;
    in.step_index = 0;
    in.snapshot = snap;
    in.initial = snap;
    const auto step = compiler.compile_document({"Check the guide", 1, {"guide"}, json::object()}, in);
    const auto kind = step.primitives.at(0).kind;
    const bool want_particles = e < 0.05;
    v.require(kind == (want_particles ? guidance::PrimitiveKind::kParticleEmitter : guidance::PrimitiveKind::kBox3d),
              fmt::format("edge {} m gave {}", e, guidance::kind_name(kind)));
    (kind == guidance::PrimitiveKind::kParticleEmitter ? particles : boxes) += 1;
  }
  v.detail = fmt::format("{} edges: {} particle_emitter below 0.05 m, {} box3d at or above", edges.size(), particles,
                         boxes);
  return v;
}

// Golden sessions ----------------------------------------------------------

std::vector<std::string> caption_categories(const std::vector<session::ProtocolMessage>& messages) {
  const auto kinds = eval::transcript_kinds(messages);
  std::vector<std::string> out;
  for (std::size_t i = 1; i < kinds.size(); ++i) out.push_back(eval::guidance_category(kinds[i]));
  return out;
}

std::string joined(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
  return out;
}

Verdict golden_sessions() {
  Verdict v;
  const std::pair<const char*, std::vector<std::string>> golden[] = {
      {"office-printer-clean", {"movement", "tool", "gesture", "tool", "highlight", "movement", "widget"}},
      {"printer-reset", {"highlight", "tool", "movement", "highlight", "widget", "highlight", "gesture"}},
  };
  for (const auto& [name, caption] : golden) {
    const auto bundle = eval::FixtureBundle::load(kFixtures / "bundles" / name);
    const auto first = eval::run_session(bundle);
    const auto second = eval::run_session(bundle);
    const auto got = caption_categories(first);
    v.require(got == caption, fmt::format("{}: steps 2-8 were [{}]", name, joined(got)));
    v.require(eval::transcript_json(first).dump() == eval::transcript_json(second).dump(),
              fmt::format("{}: transcripts differ between runs", name));
  }
  v.detail = "both caption sequences, byte-stable transcripts";
  return v;
}

// Metrics ------------------------------------------------------------------

Verdict metrics_reproduction() {
  Verdict v;
  const auto plan_accuracy = eval::aggregate(eval::load_outcomes(kFixtures / "outcomes" / "plan_accuracy.json"));
  const std::string text = eval::render_report(plan_accuracy, eval::ReportFormat::kText);
  std::set<std::string> lines;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) {
    std::istringstream words(line);
    std::string w, squeezed;
    while (words >> w) squeezed += (squeezed.empty() ? "" : " ") + w;
    lines.insert(squeezed);
  }
  const char* rows[] = {"Text Instruction 100 96 96.0%", "Visual Type 100 90 90.0%", "Key Component 100 97 97.0%",
                        "Highlight 40 32 80.0%",         "Movement 20 17 85.0%",     "Hand Gesture 14 11 78.6%",
                        "Tool 4 3 75.0%",                "Widget 5 5 100.0%",        "Total 100 65 65.0%"};
  for (const char* row : rows) v.require(lines.count(row) == 1, fmt::format("missing row '{}'", row));

  const auto type_latency = eval::aggregate(eval::load_outcomes(kFixtures / "outcomes" / "type_latency.json"));
  std::vector<std::string> got;
  for (const auto& r : type_latency.latency_rows) {
    if (!r.component) got.push_back(eval::format_percent(r.correct, r.total, 0));
  }
  const std::vector<std::string> want = {"90%", "80%", "70%", "75%", "75%", "100%"};
  v.require(got == want, fmt::format("per-type accuracy [{}]", joined(got)));
  v.detail = fmt::format("9 plan and type rows, per-type accuracy {}", joined(got));
  return v;
}

// Protocol -----------------------------------------------------------------

const char* kFourStepPlan = R"({"instructions":[
  {"instruction":"Find the lid","visual_type":1,"key_components":["lid"]},
  {"instruction":"Wipe the lid","visual_type":4,"key_components":["lid","up and down","cloth"]},
  {"instruction":"Let it dry","visual_type":5,"key_components":["lid","00:03"]},
  {"instruction":"Poke the button","visual_type":3,"key_components":["button","poke"]}]})";

geometry::SnapshotPtr flat_scene(const std::string& id, float depth) {
  auto s = std::make_shared<geometry::SceneSnapshot>();
  s->id = id;
  s->image = Image(64, 48, 3, 90);
  s->depth = geometry::DepthMap::uniform(16, 12, depth);
  s->intrinsics = {50, 50, 32, 24, 64, 48};
  return s;
}

struct Stream {
  std::vector<session::ProtocolMessage> controls;
  std::vector<session::BinaryFrame> frames;
};

Stream build_stream(const std::vector<std::string>& ops) {
  using session::MessageKind;
  Stream st;
  int n = 0;
  for (const auto& op : ops) {
    if (op == "query" || op == "advance") {
      const std::string id = "s" + std::to_string(n);
      auto [ref, frames] = session::snapshot_to_ref(*flat_scene(id, 1.0f + 0.1f * static_cast<float>(n)), id);
      ++n;
      for (auto& f : frames) st.frames.push_back(std::move(f));
      if (op == "query") {
        st.controls.push_back({MessageKind::kQuery, "", {{"query", "clean the lid"}, {"snapshot", ref}}});
      } else {
        st.controls.push_back({MessageKind::kAdvance, "session-1", {{"snapshot", ref}}});
      }
    } else if (op == "back") {
      st.controls.push_back({MessageKind::kBack, "session-1", json::object()});
    } else if (op == "get_state") {
      st.controls.push_back({MessageKind::kGetState, "session-1", json::object()});
    }
  }
  return st;
}

struct RunResult {
  json fingerprint;
  json replies;
  bool operator==(const RunResult&) const = default;
};

RunResult deliver(const std::shared_ptr<session::Pipeline>& pipeline, const Stream& st,
                  const std::vector<std::size_t>& order) {
  auto counter = std::make_shared<int>(0);
  session::SessionEngine engine(pipeline, {[counter] { return "session-" + std::to_string(++*counter); }, nullptr});
  session::InboundStream in;
  std::uint64_t seq = 0;
  for (const auto& f : st.frames) in.accept({++seq, f});
  const std::uint64_t base = seq;
  RunResult out{json::object(), json::array()};
  for (const std::size_t i : order) {
    for (const auto& m : in.accept({base + 1 + i, st.controls[i]})) {
      for (const auto& r : engine.handle(m, in.frames())) {
        json j = session::message_to_json(r);
        j["payload"].erase("timing");
        out.replies.push_back(std::move(j));
      }
    }
  }
  out.fingerprint = engine.fingerprint();
  return out;
}

// Every delivery order of the stream with up to `max_total - n` duplicates.
std::size_t model_check(const std::shared_ptr<session::Pipeline>& pipeline, const std::vector<std::string>& ops,
                        std::size_t max_total, Verdict& v, RunResult& in_order_result) {
  const Stream st = build_stream(ops);
  const std::size_t n = st.controls.size();
  std::vector<std::size_t> in_order(n);
  std::iota(in_order.begin(), in_order.end(), 0);
  in_order_result = deliver(pipeline, st, in_order);

  std::set<std::vector<std::size_t>> dup_sets{{}};
  for (std::size_t k = 0; k + n < max_total; ++k) {
    std::set<std::vector<std::size_t>> next = dup_sets;
    for (const auto& d : dup_sets) {
      for (std::size_t i = 0; i < n; ++i) {
        auto e = d;
        e.push_back(i);
        std::sort(e.begin(), e.end());
        next.insert(e);
      }
    }
    dup_sets = std::move(next);
  }
  std::size_t runs = 0;
  for (const auto& dups : dup_sets) {
    std::vector<std::size_t> order = in_order;
    order.insert(order.end(), dups.begin(), dups.end());
    std::sort(order.begin(), order.end());
    do {
      const auto got = deliver(pipeline, st, order);
      v.require(got == in_order_result, fmt::format("[{}] diverged on order {}", joined(ops), json(order).dump()));
      ++runs;
    } while (std::next_permutation(order.begin(), order.end()));
  }
  return runs;
}

bool has_error(const json& replies, const std::string& code) {
  return std::any_of(replies.begin(), replies.end(), [&](const json& r) {
    return r.at("kind") == "error" && r.at("payload").value("code", "") == code;
  });
}

Verdict protocol_robustness() {
  Verdict v;
  auto backend = std::make_shared<ScriptBackend>();
  backend->plan = kFourStepPlan;
  const auto pipeline =
      std::make_shared<session::GuidancePipeline>(std::make_shared<guidance::GuidanceCompiler>(script_gateway(backend)));
  std::size_t runs = 0;
  RunResult base;
  runs += model_check(pipeline, {"query", "advance", "back", "back", "get_state"}, 6, v, base);
  v.require(has_error(base.replies, "AtFirstStep"), "no AtFirstStep on back from step 0");
  runs += model_check(pipeline, {"query", "advance", "advance", "advance", "advance"}, 6, v, base);
  v.require(has_error(base.replies, "EndOfPlan"), "no EndOfPlan past the last step");
  runs += model_check(pipeline, {"query", "back", "get_state"}, 6, v, base);
  v.detail = fmt::format("{} delivery orders equal to in-order delivery, EndOfPlan and AtFirstStep seen", runs);
  return v;
}

// Latency ------------------------------------------------------------------

Verdict latency_instrumentation() {
  Verdict v;
  double worst_step_s = 0;
  std::size_t steps = 0;
  for (const char* name : {"office-printer-clean", "printer-reset", "kitchen"}) {
    const auto bundle = eval::FixtureBundle::load(kFixtures / "bundles" / name);
    for (const auto& id : bundle.step_scenes()) bundle.scene(id);  // disk reads are not pipeline time
    const auto t0 = Clock::now();
    const auto messages = eval::run_session(bundle);
    const double wall = seconds_since(t0);
    std::size_t ready = 0;
    for (const auto& m : messages) {
      if (m.kind != session::MessageKind::kGuidanceReady) continue;
      ++ready;
      const json& timing = m.payload.at("timing");
      for (const char* stage : {"vision_s", "geometry_s", "total_s"}) {
        v.require(timing.value(stage, 0.0) > 0.0, fmt::format("{} step {}: {} is zero", name, m.payload.at("step").get<int>(), stage));
      }
    }
    v.require(ready == bundle.step_scenes().size(), fmt::format("{}: {} guidance_ready messages", name, ready));
    if (ready > 0) worst_step_s = std::max(worst_step_s, wall / static_cast<double>(ready));
    steps += ready;
  }
  v.require(worst_step_s < 0.1, fmt::format("{:.1f} ms per step", worst_step_s * 1000));
  v.detail = fmt::format("{} steps with non-zero stage timings, worst bundle {:.1f} ms per step end to end", steps,
                         worst_step_s * 1000);
  return v;
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  const std::vector<Criterion> criteria = {
      {"schema suite", 1.0, schema_suite},
      {"classifier suite", 1.0, classifier_suite},
      {"geometry suite", 5.0, geometry_suite},
      {"5 cm rule", std::nullopt, five_cm_rule},
      {"golden pipeline run", 10.0, golden_sessions},
      {"metrics reproduction", std::nullopt, metrics_reproduction},
      {"protocol robustness", std::nullopt, protocol_robustness},
      {"latency instrumentation", std::nullopt, latency_instrumentation},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.require(false, std::string("threw: ") + e.what());
    }
    const double elapsed = seconds_since(t0);
    if (c.limit_s) v.require(elapsed < *c.limit_s, fmt::format("took {:.2f} s, limit {} s", elapsed, *c.limit_s));
    std::string line = fmt::format("{} {}: {} [{:.2f} s{}]", v.pass ? "PASS" : "FAIL", c.name, v.detail, elapsed,
                                   c.limit_s ? fmt::format(" < {} s", *c.limit_s) : "");
    for (const auto& f : v.failures) line += "\n    " + f;
    std::cout << line << std::endl;
    failed += v.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
