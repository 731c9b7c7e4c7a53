#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "guided/plan/plan.hpp"

namespace guided::plan {

// Word lists for the reference classifier. Entries may be multi-word phrases;
// matching is case-insensitive on whole words.
struct ClassifierLexicons {
  std::vector<std::string> waiting;
  std::vector<std::string> tool;
  std::vector<std::string> gesture;
  std::vector<std::string> movement;

  // Sectioned text: "[waiting]" / "[tool]" / "[gesture]" / "[movement]"
  // headers followed by one token per line; '#' starts a comment.
  static ClassifierLexicons parse(std::string_view text);
  static ClassifierLexicons load(const std::string& path);
  static const ClassifierLexicons& defaults();
};

struct Classification {
  VisualType type = VisualType::kHighlight;
  std::string rule;                  // "waiting", "tool", "gesture", "movement", "default"
  std::optional<std::string> token;  // lexicon entry that fired
};

// Deterministic cross-check for provider-assigned visual types. Checks run in
// the fixed order waiting -> tool -> gesture -> movement; the first match wins,
// otherwise Highlight.
Classification classify_visual_type(std::string_view instruction,
                                    const ClassifierLexicons& lexicons = ClassifierLexicons::defaults());

}  // namespace guided::plan
