#include "guided/plan/plan.hpp"

#include <array>
#include <charconv>
#include <utility>

#include <fmt/format.h>

#include "guided/text.hpp"

namespace guided::plan {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<GestureKind, std::string_view>, 6> kGestures{{
    {GestureKind::kPoke, "poke"},
    {GestureKind::kHook, "hook"},
    {GestureKind::kPalmPress, "palm_press"},
    {GestureKind::kGrip, "grip"},
    {GestureKind::kCylindricalGrasp, "cylindrical_grasp"},
    {GestureKind::kPinch, "pinch"},
}};

constexpr std::array<std::pair<ToolMotion, std::string_view>, 5> kToolMotions{{
    {ToolMotion::kUpAndDown, "up_and_down"},
    {ToolMotion::kLeftAndRight, "left_and_right"},
    {ToolMotion::kRotate, "rotate"},
    {ToolMotion::kClockwise, "clockwise"},
    {ToolMotion::kCounterclockwise, "counterclockwise"},
}};

bool parse_two_digits(std::string_view s, int& out) {
  if (s.size() != 2) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + 2, out);
  return ec == std::errc() && ptr == s.data() + 2 && out >= 0 && out <= 59;
}

std::size_t required_arity(VisualType t) {
  switch (t) {
    case VisualType::kHighlight: return 1;
    case VisualType::kTool: return 3;
    default: return 2;
  }
}

}  // namespace

std::optional<VisualType> visual_type_from_code(long long code) {
  if (code < 1 || code > 5) return std::nullopt;
  return static_cast<VisualType>(code);
}

int visual_type_code(VisualType t) { return static_cast<int>(t); }

std::string_view visual_type_name(VisualType t) {
  switch (t) {
    case VisualType::kHighlight: return "Highlight";
    case VisualType::kMovement: return "Movement";
    case VisualType::kHandGesture: return "Hand Gesture";
    case VisualType::kTool: return "Tool";
    case VisualType::kWidget: return "Widget";
  }
  return "?";
}

std::optional<GestureKind> parse_gesture(std::string_view s) {
  const std::string token = text::normalize_token(s);
  for (const auto& [kind, name] : kGestures) {
    if (token == name) return kind;
  }
  return std::nullopt;
}

std::string_view gesture_name(GestureKind g) {
  for (const auto& [kind, name] : kGestures) {
    if (kind == g) return name;
  }
  return "?";
}

std::optional<ToolMotion> parse_tool_motion(std::string_view s) {
  const std::string token = text::normalize_token(s);
  if (token == "counter_clockwise") return ToolMotion::kCounterclockwise;
  for (const auto& [motion, name] : kToolMotions) {
    if (token == name) return motion;
  }
  return std::nullopt;
}

std::string_view tool_motion_name(ToolMotion m) {
  for (const auto& [motion, name] : kToolMotions) {
    if (motion == m) return name;
  }
  return "?";
}

std::optional<MovementKind> parse_movement(std::string_view s) {
  const std::string token = text::normalize_token(s);
  if (token == "translation") return MovementKind::kTranslation;
  if (token == "rotation") return MovementKind::kRotation;
  return std::nullopt;
}

std::string_view movement_name(MovementKind m) {
  return m == MovementKind::kTranslation ? "translation" : "rotation";
}

bool is_wait_duration(std::string_view text) {
  if (text.size() != 5 || text[2] != ':') return false;
  int mm = 0;
  int ss = 0;
  return parse_two_digits(text.substr(0, 2), mm) && parse_two_digits(text.substr(3, 2), ss);
}

int parse_wait_duration(std::string_view text) {
  if (!is_wait_duration(text)) {
    throw Error(ErrorCode::kPatternError, fmt::format("'{}' is not mm:ss", text));
  }
  int mm = 0;
  int ss = 0;
  parse_two_digits(text.substr(0, 2), mm);
  parse_two_digits(text.substr(3, 2), ss);
  return 60 * mm + ss;
}

std::string SchemaViolation::to_string() const {
  if (step_index) return fmt::format("step {}: {}: {}", *step_index, field, reason);
  return fmt::format("{}: {}", field, reason);
}

namespace {
std::string summarize(const std::vector<SchemaViolation>& violations) {
  std::string out = "schema violation";
  for (const auto& v : violations) out += "; " + v.to_string();
  return out;
}
}  // namespace

PlanValidationError::PlanValidationError(std::vector<SchemaViolation> violations)
    : Error(ErrorCode::kSchemaViolation, summarize(violations)),
      violations_(std::move(violations)) {}

std::vector<SchemaViolation> validate_step(const StepDocument& step,
                                           std::optional<std::size_t> step_index) {
  std::vector<SchemaViolation> out;
  auto violate = [&](std::string field, std::string reason) {
    out.push_back({step_index, std::move(field), std::move(reason)});
  };

  if (text::is_blank(step.instruction)) violate("instruction", "missing");

  const auto type = visual_type_from_code(step.visual_type);
  if (!type) violate("visual_type", fmt::format("invalid VisualType {}", step.visual_type));

  const auto& kc = step.key_components;
  if (kc.empty()) {
    violate("key_components", "empty");
  } else if (text::is_blank(kc[0])) {
    violate("key_components[0]", "missing interaction target");
  }
  if (!type) return out;

  const std::size_t need = required_arity(*type);
  const bool arity_ok = *type == VisualType::kHighlight ? kc.size() >= need : kc.size() == need;
  if (!arity_ok) {
    if (!kc.empty()) {
      violate("key_components",
              fmt::format("{} requires {}{} entries, got {}", visual_type_name(*type),
                          *type == VisualType::kHighlight ? "at least " : "", need, kc.size()));
    }
    return out;
  }

  switch (*type) {
    case VisualType::kHighlight:
      break;
    case VisualType::kMovement:
      if (!parse_movement(kc[1])) {
        violate("key_components[1]", fmt::format("invalid MovementKind '{}'", kc[1]));
      }
      break;
    case VisualType::kHandGesture:
      if (!parse_gesture(kc[1])) {
        violate("key_components[1]", fmt::format("invalid GestureKind '{}'", kc[1]));
      }
      break;
    case VisualType::kTool:
      if (!parse_tool_motion(kc[1])) {
        violate("key_components[1]", fmt::format("invalid ToolMotion '{}'", kc[1]));
      }
      if (text::is_blank(kc[2])) violate("key_components[2]", "missing tool name");
      break;
    case VisualType::kWidget:
      if (!is_wait_duration(kc[1])) violate("key_components[1]", "not mm:ss");
      break;
  }
  return out;
}

PlanStep PlanStep::from_document(const StepDocument& doc) {
  auto violations = validate_step(doc);
  if (!violations.empty()) throw PlanValidationError(std::move(violations));

  PlanStep step;
  step.instruction_ = doc.instruction;
  step.visual_type_ = *visual_type_from_code(doc.visual_type);
  step.key_components_ = doc.key_components;
  step.extras_ = doc.extras;
  const auto& kc = step.key_components_;
  switch (step.visual_type_) {
    case VisualType::kHighlight:
      break;
    case VisualType::kMovement:
      step.payload_ = *parse_movement(kc[1]);
      break;
    case VisualType::kHandGesture:
      step.payload_ = *parse_gesture(kc[1]);
      break;
    case VisualType::kTool:
      step.payload_ = ToolUse{*parse_tool_motion(kc[1]), kc[2]};
      break;
    case VisualType::kWidget:
      step.payload_ = WaitDuration{parse_wait_duration(kc[1])};
      break;
  }
  return step;
}

std::optional<MovementKind> PlanStep::movement() const {
  if (auto* m = std::get_if<MovementKind>(&payload_)) return *m;
  return std::nullopt;
}

std::optional<GestureKind> PlanStep::gesture() const {
  if (auto* g = std::get_if<GestureKind>(&payload_)) return *g;
  return std::nullopt;
}

std::optional<ToolUse> PlanStep::tool_use() const {
  if (auto* t = std::get_if<ToolUse>(&payload_)) return *t;
  return std::nullopt;
}

std::optional<int> PlanStep::wait_seconds() const {
  if (auto* w = std::get_if<WaitDuration>(&payload_)) return w->seconds;
  return std::nullopt;
}

StepDocument PlanStep::to_document() const {
  return {instruction_, visual_type_code(visual_type_), key_components_, extras_};
}

namespace {

// Reads one step object into a StepDocument, reporting JSON-shape problems
// the typed validator cannot see.
std::optional<StepDocument> read_step(const json& j, std::size_t index,
                                      std::vector<SchemaViolation>& shape) {
  auto violate = [&](std::string field, std::string reason) {
    shape.push_back({index, std::move(field), std::move(reason)});
  };
  if (!j.is_object()) {
    violate("step", "not an object");
    return std::nullopt;
  }
  StepDocument doc;
  for (const auto& [key, value] : j.items()) {
    if (key != "instruction" && key != "visual_type" && key != "key_components") {
      doc.extras[key] = value;
    }
  }

  if (auto it = j.find("instruction"); it == j.end() || it->is_null()) {
    violate("instruction", "missing");
  } else if (!it->is_string()) {
    violate("instruction", "not a string");
  } else {
    doc.instruction = text::trim(it->get<std::string>());
  }

  if (auto it = j.find("visual_type"); it == j.end() || it->is_null()) {
    violate("visual_type", "missing");
  } else if (!it->is_number_integer()) {
    violate("visual_type", "not an integer");
  } else {
    doc.visual_type = it->get<long long>();
  }

  if (auto it = j.find("key_components"); it == j.end() || it->is_null()) {
    violate("key_components", "missing");
  } else if (!it->is_array()) {
    violate("key_components", "not a list");
  } else {
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& entry = (*it)[i];
      if (!entry.is_string()) {
        violate(fmt::format("key_components[{}]", i), "not a string");
        doc.key_components.emplace_back();
      } else {
        doc.key_components.push_back(text::trim(entry.get<std::string>()));
      }
    }
  }
  return doc;
}

}  // namespace

TaskPlan parse_plan_json(const json& document, std::string source_query) {
  if (!document.is_object()) {
    throw PlanValidationError({{std::nullopt, "instructions", "document is not an object"}});
  }
  auto it = document.find("instructions");
  if (it == document.end() || !it->is_array()) {
    throw PlanValidationError({{std::nullopt, "instructions", "missing list"}});
  }
  if (it->empty()) {
    throw PlanValidationError({{std::nullopt, "instructions", "empty"}});
  }

  TaskPlan plan;
  plan.source_query = std::move(source_query);
  if (auto brand = document.find("device_brand"); brand != document.end() && brand->is_string()) {
    std::string hint = text::trim(brand->get<std::string>());
    if (!hint.empty()) plan.device_hint = std::move(hint);
  }

  std::vector<SchemaViolation> errors;
  for (std::size_t i = 0; i < it->size(); ++i) {
    std::vector<SchemaViolation> shape;
    auto doc = read_step((*it)[i], i, shape);
    if (!shape.empty()) {
      errors.push_back(shape.front());
      continue;
    }
    auto violations = validate_step(*doc, i);
    if (!violations.empty()) {
      errors.push_back(violations.front());
      continue;
    }
    if (errors.empty()) plan.steps.push_back(PlanStep::from_document(*doc));
  }
  if (!errors.empty()) throw PlanValidationError(std::move(errors));
  return plan;
}

TaskPlan parse_plan(std::string_view document, std::string source_query) {
  json j = json::parse(document, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    throw Error(ErrorCode::kMalformedDocument, "plan document is not valid JSON");
  }
  return parse_plan_json(j, std::move(source_query));
}

json plan_to_json(const TaskPlan& plan) {
  json steps = json::array();
  for (const auto& step : plan.steps) {
    json s = step.extras();
    s["instruction"] = step.instruction();
    s["visual_type"] = visual_type_code(step.visual_type());
    s["key_components"] = step.key_components();
    steps.push_back(std::move(s));
  }
  json doc{{"instructions", std::move(steps)}};
  if (plan.device_hint) doc["device_brand"] = *plan.device_hint;
  return doc;
}

std::string serialize_plan(const TaskPlan& plan) { return plan_to_json(plan).dump(); }

}  // namespace guided::plan
