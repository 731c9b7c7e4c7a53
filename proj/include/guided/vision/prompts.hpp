#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace guided::vision {

enum class PromptId { kPlan, kBoundingBox, kTranslation, kRotation, kBrandHint, kFeedback };

using SlotMap = std::map<std::string, std::string, std::less<>>;

// Prompt templates loaded from a directory of text files (plan.txt, bbox.txt,
// translation.txt, rotation.txt, brand_hint.txt, feedback.txt). Slots are
// written ${name}; everything else is copied byte for byte.
class PromptLibrary {
 public:
  static PromptLibrary load(const std::filesystem::path& dir);
  // data/prompts of the source tree.
  static const PromptLibrary& shipped();

  const std::string& raw(PromptId id) const;
  // Slot names referenced by the template, in order of first use.
  std::vector<std::string> slots(PromptId id) const;

  // Throws Error(kMissingSlot) naming the first absent slot. Extra entries in
  // `values` are ignored. Values are inserted verbatim and never rescanned.
  std::string render(PromptId id, const SlotMap& values = {}) const;

 private:
  std::map<PromptId, std::string> templates_;
};

}  // namespace guided::vision
