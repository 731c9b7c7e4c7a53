#include "guided/eval/bundle.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "guided/error.hpp"
#include "guided/text.hpp"

namespace guided::eval {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Reader {
  fs::path file;

  [[noreturn]] void fail(const std::string& field, const std::string& why) const {
    throw Error(ErrorCode::kBundleFormat, fmt::format("{}: field '{}': {}", file.string(), field, why));
  }

  json parse() const {
    if (!fs::exists(file)) throw Error(ErrorCode::kBundleFormat, fmt::format("{}: missing", file.string()));
    try {
      return json::parse(text::read_file(file.string()));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kBundleFormat, fmt::format("{}: {}", file.string(), e.what()));
    }
  }

  template <typename T>
  T get(const json& j, const std::string& field, const std::string& path) const {
    if (!j.is_object() || !j.contains(field)) fail(path, "missing");
    try {
      return j.at(field).get<T>();
    } catch (const json::exception& e) {
      fail(path, e.what());
    }
  }
};

StepLabel read_label(const Reader& r, const json& j, std::size_t i) {
  const std::string at = fmt::format("steps[{}]", i);
  StepLabel l;
  const auto type = plan::visual_type_from_code(r.get<long long>(j, "expected_visual_type", at + ".expected_visual_type"));
  if (!type) r.fail(at + ".expected_visual_type", "not a visual type code");
  l.expected_type = *type;
  l.expected_component = r.get<std::string>(j, "expected_key_component", at + ".expected_key_component");
  l.instruction_correct = r.get<bool>(j, "instruction_correct", at + ".instruction_correct");
  if (j.contains("guidance_correct") && !j.at("guidance_correct").is_null()) {
    l.guidance_correct = r.get<bool>(j, "guidance_correct", at + ".guidance_correct");
  }
  if (j.contains("expected")) {
    const json& e = j.at("expected");
    const std::string ea = at + ".expected";
    if (e.contains("box") && !e.at("box").is_null()) {
      const auto b = r.get<std::vector<double>>(e, "box", ea + ".box");
      if (b.size() != 4) r.fail(ea + ".box", "expected [y_min, x_min, y_max, x_max]");
      l.box = geometry::BoundingBox2D{b[0], b[1], b[2], b[3]};
    }
    if (e.contains("target") && !e.at("target").is_null()) {
      const auto t = r.get<std::vector<double>>(e, "target", ea + ".target");
      if (t.size() != 2) r.fail(ea + ".target", "expected [x, y]");
      l.target = geometry::Point2(t[0], t[1]);
    }
    if (e.contains("rotation") && !e.at("rotation").is_null()) {
      const auto rot = r.get<std::vector<std::string>>(e, "rotation", ea + ".rotation");
      if (rot.size() != 2) r.fail(ea + ".rotation", "expected [axis, direction]");
      l.rotation = std::make_pair(rot[0], rot[1]);
    }
    if (e.contains("gesture") && !e.at("gesture").is_null()) l.gesture = r.get<std::string>(e, "gesture", ea + ".gesture");
    if (e.contains("tool") && !e.at("tool").is_null()) l.tool = r.get<std::string>(e, "tool", ea + ".tool");
    if (e.contains("kinds") && !e.at("kinds").is_null()) {
      l.kinds = r.get<std::vector<std::string>>(e, "kinds", ea + ".kinds");
    }
  }
  if (j.contains("components")) {
    if (!j.at("components").is_object()) r.fail(at + ".components", "not an object");
    for (const auto& [name, verdict] : j.at("components").items()) {
      const auto id = parse_component(name);
      if (!id) r.fail(at + ".components." + name, "unknown component");
      if (!verdict.is_boolean()) r.fail(at + ".components." + name, "not a boolean");
      l.components[*id] = verdict.get<bool>();
    }
  }
  return l;
}

}  // namespace

Category StepLabel::category() const {
  std::optional<plan::MovementKind> movement;
  if (expected_type == plan::VisualType::kMovement) {
    movement = rotation ? plan::MovementKind::kRotation : plan::MovementKind::kTranslation;
  }
  return category_for(expected_type, movement);
}

FixtureBundle FixtureBundle::load(const fs::path& dir) {
  FixtureBundle b;
  b.dir_ = dir;

  const Reader meta{dir / "bundle.json"};
  const json doc = meta.parse();
  if (doc.value("format", "") != "guided.bundle/1") meta.fail("format", "expected guided.bundle/1");
  b.bundle_id_ = meta.get<std::string>(doc, "bundle_id", "bundle_id");
  b.query_ = meta.get<std::string>(doc, "query", "query");
  b.initial_scene_ = meta.get<std::string>(doc, "initial_scene", "initial_scene");
  b.provider_ = doc.value("provider", "provider");
  const json steps = meta.get<json>(doc, "steps", "steps");
  if (!steps.is_array()) meta.fail("steps", "not an array");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    b.step_scenes_.push_back(meta.get<std::string>(steps[i], "scene", fmt::format("steps[{}].scene", i)));
  }
  for (const auto& id : b.step_scenes_) {
    if (!fs::exists(dir / "scenes" / id / "meta.json")) meta.fail("steps[].scene", "no scene directory for " + id);
  }
  if (!fs::exists(dir / "scenes" / b.initial_scene_ / "meta.json")) {
    meta.fail("initial_scene", "no scene directory for " + b.initial_scene_);
  }

  const Reader plan_file{dir / "plan.json"};
  b.plan_document_ = plan_file.parse();
  const json instructions = plan_file.get<json>(b.plan_document_, "instructions", "instructions");
  if (!instructions.is_array()) plan_file.fail("instructions", "not an array");

  const Reader label_file{dir / "labels.json"};
  const json labels = label_file.get<json>(label_file.parse(), "steps", "steps");
  if (!labels.is_array()) label_file.fail("steps", "not an array");
  for (std::size_t i = 0; i < labels.size(); ++i) b.labels_.push_back(read_label(label_file, labels[i], i));

  if (b.labels_.size() != instructions.size()) {
    label_file.fail("steps", fmt::format("{} labels for {} plan steps", b.labels_.size(), instructions.size()));
  }
  if (b.step_scenes_.size() != b.labels_.size()) {
    meta.fail("steps", fmt::format("{} step scenes for {} labelled steps", b.step_scenes_.size(), b.labels_.size()));
  }
  if (!fs::exists(b.provider_dir() / "index.json")) meta.fail("provider", "no index.json under " + b.provider_);
  return b;
}

std::vector<FixtureBundle> FixtureBundle::load_all(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error(ErrorCode::kBundleFormat, root.string() + ": not a directory");
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory() && fs::exists(e.path() / "bundle.json")) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<FixtureBundle> out;
  for (const auto& d : dirs) out.push_back(load(d));
  return out;
}

geometry::SnapshotPtr FixtureBundle::scene(const std::string& id) const {
  std::lock_guard lock(cache_->mu);
  auto& slot = cache_->scenes[id];
  if (!slot) {
    try {
      slot = std::make_shared<const geometry::SceneSnapshot>(geometry::load_scene(dir_ / "scenes" / id, id));
    } catch (const Error& e) {
      throw Error(ErrorCode::kBundleFormat, fmt::format("{}: scene {}: {}", bundle_id_, id, e.what()));
    }
  }
  return slot;
}

}  // namespace guided::eval
