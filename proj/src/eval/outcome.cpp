#include "guided/eval/outcome.hpp"

#include <array>

#include <fmt/format.h>

#include "guided/error.hpp"
#include "guided/text.hpp"

namespace guided::eval {

using nlohmann::json;

namespace {

struct CategoryInfo {
  Category c;
  std::string_view name;
  std::string_view title;
};

constexpr std::array<CategoryInfo, 6> kCategories{{
    {Category::kHighlight, "highlight", "Highlight"},
    {Category::kTranslation, "translation", "Translational Movement"},
    {Category::kRotation, "rotation", "Rotational Movement"},
    {Category::kGesture, "gesture", "Hand Gesture"},
    {Category::kTool, "tool", "Tool"},
    {Category::kWidget, "widget", "Widget"},
}};

struct ComponentInfo {
  ComponentId c;
  std::string_view name;
  std::string_view title;
};

constexpr std::array<ComponentInfo, 7> kComponents{{
    {ComponentId::kBox, "bbox", "2D Box"},
    {ComponentId::kEndPosition, "end_position", "End Position"},
    {ComponentId::kSegmentation, "segmentation", "Segmentation"},
    {ComponentId::kRotationInfo, "rotation_info", "Rotation Info"},
    {ComponentId::kGestureType, "gesture_type", "Type"},
    {ComponentId::kPlacement, "placement", "Placement"},
    {ComponentId::kToolGen, "tool_gen", "Tool Gen"},
}};

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::kBundleFormat, fmt::format("outcome field '{}': {}", field, why));
}

template <typename T>
T get(const json& j, const char* field) {
  if (!j.contains(field)) bad(field, "missing");
  try {
    return j.at(field).get<T>();
  } catch (const json::exception& e) {
    bad(field, e.what());
  }
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* field) {
  if (!j.contains(field) || j.at(field).is_null()) return std::nullopt;
  return get<T>(j, field);
}

plan::VisualType type_from(const json& j, const char* field) {
  const auto t = plan::visual_type_from_code(get<long long>(j, field));
  if (!t) bad(field, "not a visual type code");
  return *t;
}

json optional_json(const auto& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string_view category_name(Category c) {
  for (const auto& i : kCategories) {
    if (i.c == c) return i.name;
  }
  return "?";
}

std::string_view category_title(Category c) {
  for (const auto& i : kCategories) {
    if (i.c == c) return i.title;
  }
  return "?";
}

std::optional<Category> parse_category(std::string_view s) {
  for (const auto& i : kCategories) {
    if (i.name == s) return i.c;
  }
  return std::nullopt;
}

Category category_for(plan::VisualType type, std::optional<plan::MovementKind> movement) {
  switch (type) {
    case plan::VisualType::kHighlight: return Category::kHighlight;
    case plan::VisualType::kMovement:
      return movement == plan::MovementKind::kRotation ? Category::kRotation : Category::kTranslation;
    case plan::VisualType::kHandGesture: return Category::kGesture;
    case plan::VisualType::kTool: return Category::kTool;
    case plan::VisualType::kWidget: return Category::kWidget;
  }
  return Category::kHighlight;
}

std::string_view component_name(ComponentId c) {
  for (const auto& i : kComponents) {
    if (i.c == c) return i.name;
  }
  return "?";
}

std::string_view component_title(ComponentId c) {
  for (const auto& i : kComponents) {
    if (i.c == c) return i.title;
  }
  return "?";
}

std::optional<ComponentId> parse_component(std::string_view s) {
  for (const auto& i : kComponents) {
    if (i.name == s) return i.c;
  }
  return std::nullopt;
}

const std::vector<ComponentId>& components_of(Category c) {
  using C = ComponentId;
  static const std::vector<C> box{C::kBox};
  static const std::vector<C> translation{C::kBox, C::kEndPosition, C::kSegmentation};
  static const std::vector<C> rotation{C::kBox, C::kRotationInfo, C::kSegmentation};
  static const std::vector<C> gesture{C::kBox, C::kGestureType, C::kPlacement};
  static const std::vector<C> tool{C::kBox, C::kToolGen};
  switch (c) {
    case Category::kTranslation: return translation;
    case Category::kRotation: return rotation;
    case Category::kGesture: return gesture;
    case Category::kTool: return tool;
    default: return box;
  }
}

const ComponentOutcome* StepOutcome::component(ComponentId id) const {
  for (const auto& c : components) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

json outcome_to_json(const StepOutcome& o, bool include_latency) {
  json components = json::array();
  for (const auto& c : o.components) {
    json cj{{"name", component_name(c.id)}, {"correct", optional_json(c.correct)}};
    if (include_latency) cj["latency_s"] = optional_json(c.latency_s);
    components.push_back(std::move(cj));
  }
  json j{
      {"bundle_id", o.bundle_id},
      {"step", o.step},
      {"expected_type", plan::visual_type_code(o.expected_type)},
      {"generated_type", o.generated_type ? json(plan::visual_type_code(*o.generated_type)) : json(nullptr)},
      {"category", category_name(o.category)},
      {"instruction_correct", o.instruction_correct},
      {"type_correct", o.type_correct},
      {"component_correct", o.component_correct},
      {"guidance_correct", optional_json(o.guidance_correct)},
      {"kinds", o.kinds},
      {"error", optional_json(o.error)},
      {"generated_tool", o.generated_tool},
      {"components", std::move(components)},
  };
  if (include_latency) j["latency_s"] = optional_json(o.latency_s);
  return j;
}

StepOutcome outcome_from_json(const json& j) {
  if (!j.is_object()) bad("outcomes[]", "not an object");
  StepOutcome o;
  o.bundle_id = get<std::string>(j, "bundle_id");
  o.step = get<std::size_t>(j, "step");
  o.expected_type = type_from(j, "expected_type");
  if (j.contains("generated_type") && !j.at("generated_type").is_null()) {
    o.generated_type = type_from(j, "generated_type");
  }
  const auto category = parse_category(get<std::string>(j, "category"));
  if (!category) bad("category", "unknown category");
  o.category = *category;
  o.instruction_correct = get<bool>(j, "instruction_correct");
  o.type_correct = get<bool>(j, "type_correct");
  o.component_correct = get<bool>(j, "component_correct");
  o.guidance_correct = get_optional<bool>(j, "guidance_correct");
  o.kinds = get_optional<std::vector<std::string>>(j, "kinds").value_or(std::vector<std::string>{});
  o.error = get_optional<std::string>(j, "error");
  o.latency_s = get_optional<double>(j, "latency_s");
  o.generated_tool = get_optional<bool>(j, "generated_tool").value_or(false);
  if (j.contains("components")) {
    if (!j.at("components").is_array()) bad("components", "not an array");
    for (const auto& cj : j.at("components")) {
      const auto id = parse_component(get<std::string>(cj, "name"));
      if (!id) bad("components[].name", "unknown component");
      o.components.push_back({*id, get_optional<bool>(cj, "correct"), get_optional<double>(cj, "latency_s")});
    }
  }
  return o;
}

json outcomes_to_json(const std::vector<StepOutcome>& outcomes, bool include_latency) {
  json list = json::array();
  for (const auto& o : outcomes) list.push_back(outcome_to_json(o, include_latency));
  return {{"format", "guided.outcomes/1"}, {"outcomes", std::move(list)}};
}

std::vector<StepOutcome> outcomes_from_json(const json& doc) {
  if (!doc.is_object() || doc.value("format", "") != "guided.outcomes/1") bad("format", "expected guided.outcomes/1");
  if (!doc.contains("outcomes") || !doc.at("outcomes").is_array()) bad("outcomes", "missing or not an array");
  std::vector<StepOutcome> out;
  for (const auto& j : doc.at("outcomes")) out.push_back(outcome_from_json(j));
  return out;
}

std::vector<StepOutcome> load_outcomes(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(text::read_file(path.string()));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBundleFormat, fmt::format("{}: {}", path.string(), e.what()));
  }
  try {
    return outcomes_from_json(doc);
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("{}: {}", path.string(), e.what()));
  }
}

void save_outcomes(const std::filesystem::path& path, const std::vector<StepOutcome>& outcomes) {
  text::write_file(path.string(), outcomes_to_json(outcomes).dump(2) + "\n");
}

}  // namespace guided::eval
