#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "guided/plan/plan.hpp"

namespace guided::eval {

// Guidance categories of the per-type table; movement splits by kind.
enum class Category { kHighlight, kTranslation, kRotation, kGesture, kTool, kWidget };

inline constexpr Category kAllCategories[] = {Category::kHighlight, Category::kTranslation, Category::kRotation,
                                              Category::kGesture,   Category::kTool,        Category::kWidget};

std::string_view category_name(Category c);   // "translation"
std::string_view category_title(Category c);  // "Translational Movement"
std::optional<Category> parse_category(std::string_view s);
Category category_for(plan::VisualType type, std::optional<plan::MovementKind> movement);

// Pipeline stages scored separately within a category.
enum class ComponentId { kBox, kEndPosition, kSegmentation, kRotationInfo, kGestureType, kPlacement, kToolGen };

std::string_view component_name(ComponentId c);   // "end_position"
std::string_view component_title(ComponentId c);  // "End Position"
std::optional<ComponentId> parse_component(std::string_view s);
// Fixed row order of a category's component breakdown.
const std::vector<ComponentId>& components_of(Category c);

struct ComponentOutcome {
  ComponentId id = ComponentId::kBox;
  std::optional<bool> correct;  // nullopt: not assessed
  std::optional<double> latency_s;
  friend bool operator==(const ComponentOutcome&, const ComponentOutcome&) = default;
};

struct StepOutcome {
  std::string bundle_id;
  std::size_t step = 0;
  plan::VisualType expected_type = plan::VisualType::kHighlight;
  std::optional<plan::VisualType> generated_type;  // nullopt when the plan had no such step
  Category category = Category::kHighlight;

  bool instruction_correct = false;
  bool type_correct = false;
  bool component_correct = false;
  std::optional<bool> guidance_correct;  // nullopt: guidance not assessed

  std::vector<std::string> kinds;
  std::optional<std::string> error;  // error code name of a failed compile
  std::optional<double> latency_s;   // compile wall clock
  bool generated_tool = false;
  std::vector<ComponentOutcome> components;

  bool plan_correct() const { return instruction_correct && type_correct && component_correct; }
  bool end_to_end_correct() const { return plan_correct() && guidance_correct.value_or(false); }
  const ComponentOutcome* component(ComponentId id) const;

  friend bool operator==(const StepOutcome&, const StepOutcome&) = default;
};

// Outcome document: {"format": "guided.outcomes/1", "outcomes": [...]}.
// Field and file errors raise Error(kBundleFormat) naming the field.
nlohmann::json outcome_to_json(const StepOutcome& o, bool include_latency = true);
StepOutcome outcome_from_json(const nlohmann::json& j);
nlohmann::json outcomes_to_json(const std::vector<StepOutcome>& outcomes, bool include_latency = true);
std::vector<StepOutcome> outcomes_from_json(const nlohmann::json& doc);
std::vector<StepOutcome> load_outcomes(const std::filesystem::path& path);
void save_outcomes(const std::filesystem::path& path, const std::vector<StepOutcome>& outcomes);

}  // namespace guided::eval
