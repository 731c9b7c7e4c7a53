#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "guided/error.hpp"

namespace guided::plan {

enum class VisualType { kHighlight = 1, kMovement = 2, kHandGesture = 3, kTool = 4, kWidget = 5 };

enum class GestureKind { kPoke, kHook, kPalmPress, kGrip, kCylindricalGrasp, kPinch };

enum class ToolMotion { kUpAndDown, kLeftAndRight, kRotate, kClockwise, kCounterclockwise };

enum class MovementKind { kTranslation, kRotation };

std::optional<VisualType> visual_type_from_code(long long code);
int visual_type_code(VisualType t);
std::string_view visual_type_name(VisualType t);

// Accepts the plan-document spellings ("palm press", "cylindrical grasp") as
// well as the canonical snake_case names.
std::optional<GestureKind> parse_gesture(std::string_view s);
std::string_view gesture_name(GestureKind g);

// "up and down", "left and right", "rotate", "clockwise", "counterclockwise"
// (also "counter clockwise").
std::optional<ToolMotion> parse_tool_motion(std::string_view s);
std::string_view tool_motion_name(ToolMotion m);

std::optional<MovementKind> parse_movement(std::string_view s);
std::string_view movement_name(MovementKind m);

// mm:ss with both fields in 00..59. Throws PatternError.
int parse_wait_duration(std::string_view text);
bool is_wait_duration(std::string_view text);

struct SchemaViolation {
  std::optional<std::size_t> step_index;  // nullopt for document-level problems
  std::string field;                      // "visual_type", "key_components[1]", ...
  std::string reason;

  std::string to_string() const;
  friend bool operator==(const SchemaViolation&, const SchemaViolation&) = default;
};

class PlanValidationError : public Error {
 public:
  explicit PlanValidationError(std::vector<SchemaViolation> violations);
  const std::vector<SchemaViolation>& violations() const noexcept { return violations_; }

 private:
  std::vector<SchemaViolation> violations_;
};

// A step as it appears in the document, before validation. Strings are
// already trimmed.
struct StepDocument {
  std::string instruction;
  long long visual_type = 0;
  std::vector<std::string> key_components;
  nlohmann::json extras = nlohmann::json::object();
};

// Every violated invariant; empty means the step is valid.
std::vector<SchemaViolation> validate_step(const StepDocument& step,
                                           std::optional<std::size_t> step_index = std::nullopt);

struct ToolUse {
  ToolMotion motion;
  std::string tool;
  friend bool operator==(const ToolUse&, const ToolUse&) = default;
};

struct WaitDuration {
  int seconds = 0;
  friend bool operator==(const WaitDuration&, const WaitDuration&) = default;
};

using StepPayload = std::variant<std::monostate, MovementKind, GestureKind, ToolUse, WaitDuration>;

// A validated plan step. Only constructible from a StepDocument that passes
// validate_step.
class PlanStep {
 public:
  static PlanStep from_document(const StepDocument& doc);

  const std::string& instruction() const { return instruction_; }
  VisualType visual_type() const { return visual_type_; }
  const std::vector<std::string>& key_components() const { return key_components_; }
  // "component property + component name"; the grounding query text.
  const std::string& target() const { return key_components_.front(); }
  const StepPayload& payload() const { return payload_; }
  const nlohmann::json& extras() const { return extras_; }

  std::optional<MovementKind> movement() const;
  std::optional<GestureKind> gesture() const;
  std::optional<ToolUse> tool_use() const;
  std::optional<int> wait_seconds() const;

  StepDocument to_document() const;

  friend bool operator==(const PlanStep&, const PlanStep&) = default;

 private:
  PlanStep() = default;

  std::string instruction_;
  VisualType visual_type_ = VisualType::kHighlight;
  std::vector<std::string> key_components_;
  StepPayload payload_;
  nlohmann::json extras_ = nlohmann::json::object();
};

struct TaskPlan {
  std::vector<PlanStep> steps;
  std::string source_query;
  std::optional<std::string> device_hint;

  friend bool operator==(const TaskPlan&, const TaskPlan&) = default;
};

// Parses the "instructions" document. Throws Error(kMalformedDocument) when the
// text is not JSON, PlanValidationError with one violation per failing step
// (first violation of each) otherwise.
TaskPlan parse_plan(std::string_view document, std::string source_query = {});
TaskPlan parse_plan_json(const nlohmann::json& document, std::string source_query = {});

nlohmann::json plan_to_json(const TaskPlan& plan);
std::string serialize_plan(const TaskPlan& plan);

}  // namespace guided::plan
