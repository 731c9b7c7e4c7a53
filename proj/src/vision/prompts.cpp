#include "guided/vision/prompts.hpp"

#include <algorithm>

#include "guided/error.hpp"
#include "guided/paths.hpp"
#include "guided/text.hpp"

namespace guided::vision {

namespace {

constexpr std::pair<PromptId, const char*> kFiles[] = {
    {PromptId::kPlan, "plan.txt"},           {PromptId::kBoundingBox, "bbox.txt"},
    {PromptId::kTranslation, "translation.txt"}, {PromptId::kRotation, "rotation.txt"},
    {PromptId::kBrandHint, "brand_hint.txt"}, {PromptId::kFeedback, "feedback.txt"},
};

// Calls fn(literal_text) and slot(name) in template order.
template <typename Literal, typename Slot>
void walk(std::string_view tpl, Literal&& literal, Slot&& slot) {
  std::size_t pos = 0;
  while (pos < tpl.size()) {
    const std::size_t open = tpl.find("${", pos);
    const std::size_t close = open == std::string_view::npos ? open : tpl.find('}', open + 2);
    if (close == std::string_view::npos) {
      literal(tpl.substr(pos));
      return;
    }
    literal(tpl.substr(pos, open - pos));
    slot(tpl.substr(open + 2, close - open - 2));
    pos = close + 1;
  }
}

}  // namespace

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
  PromptLibrary lib;
  for (const auto& [id, file] : kFiles) lib.templates_[id] = text::read_file((dir / file).string());
  return lib;
}

const PromptLibrary& PromptLibrary::shipped() {
  static const PromptLibrary lib = load(data_dir() / "prompts");
  return lib;
}

const std::string& PromptLibrary::raw(PromptId id) const { return templates_.at(id); }

std::vector<std::string> PromptLibrary::slots(PromptId id) const {
  std::vector<std::string> names;
  walk(raw(id), [](std::string_view) {},
       [&](std::string_view name) {
         if (std::find(names.begin(), names.end(), name) == names.end()) names.emplace_back(name);
       });
  return names;
}

std::string PromptLibrary::render(PromptId id, const SlotMap& values) const {
  std::string out;
  walk(raw(id), [&](std::string_view lit) { out.append(lit); },
       [&](std::string_view name) {
         auto it = values.find(name);
         if (it == values.end()) throw Error(ErrorCode::kMissingSlot, "missing prompt slot '" + std::string(name) + "'");
         out.append(it->second);
       });
  return out;
}

}  // namespace guided::vision
