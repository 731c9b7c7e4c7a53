#include "guided/plan/classifier.hpp"

#include <cctype>
#include <sstream>

#include "guided/text.hpp"

namespace guided::plan {

namespace {

std::vector<std::string> words_of(std::string_view s) {
  std::vector<std::string> words;
  std::string current;
  for (char c : s) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc) || c == '\'') {
      current.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

bool contains_phrase(const std::vector<std::string>& haystack, const std::vector<std::string>& phrase) {
  if (phrase.empty() || phrase.size() > haystack.size()) return false;
  for (std::size_t i = 0; i + phrase.size() <= haystack.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < phrase.size() && match; ++j) match = haystack[i + j] == phrase[j];
    if (match) return true;
  }
  return false;
}

std::optional<std::string> first_match(const std::vector<std::string>& words,
                                       const std::vector<std::string>& lexicon) {
  for (const auto& entry : lexicon) {
    if (contains_phrase(words, words_of(entry))) return entry;
  }
  return std::nullopt;
}

// Fallback used when data/lexicons.txt is not available at runtime.
constexpr std::string_view kBuiltinLexicons = R"([waiting]
wait
waiting
stand for
rest for
let it rest
let it sit
sit for
pause for
cool down
countdown
[tool]
whisk
screwdriver
wrench
spanner
cloth
towel
sponge
scraper
spatula
brush
knife
hammer
pliers
tweezers
scissors
hex key
allen key
ladle
spoon
[gesture]
pull
pinch
poke
hook
grip
grasp
squeeze
pluck
[movement]
move
return
open
close
slide
rotate
turn
lift
lower
insert
remove
push
twist
flip
shift
raise
)";

}  // namespace

ClassifierLexicons ClassifierLexicons::parse(std::string_view text_in) {
  ClassifierLexicons lex;
  std::vector<std::string>* section = nullptr;
  std::istringstream in{std::string(text_in)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = text::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      const std::string name = text::to_lower(line.substr(1, line.size() - 2));
      if (name == "waiting") section = &lex.waiting;
      else if (name == "tool") section = &lex.tool;
      else if (name == "gesture") section = &lex.gesture;
      else if (name == "movement") section = &lex.movement;
      else throw Error(ErrorCode::kConfigError, "unknown lexicon section [" + name + "]");
      continue;
    }
    if (section == nullptr) {
      throw Error(ErrorCode::kConfigError, "lexicon token outside a section: " + line);
    }
    section->push_back(text::normalize_phrase(line));
  }
  return lex;
}

ClassifierLexicons ClassifierLexicons::load(const std::string& path) {
  return parse(text::read_file(path));
}

const ClassifierLexicons& ClassifierLexicons::defaults() {
  static const ClassifierLexicons lex = parse(kBuiltinLexicons);
  return lex;
}

Classification classify_visual_type(std::string_view instruction, const ClassifierLexicons& lexicons) {
  const auto words = words_of(instruction);
  struct Rule {
    const char* name;
    const std::vector<std::string>* lexicon;
    VisualType type;
  };
  const Rule rules[] = {
      {"waiting", &lexicons.waiting, VisualType::kWidget},
      {"tool", &lexicons.tool, VisualType::kTool},
      {"gesture", &lexicons.gesture, VisualType::kHandGesture},
      {"movement", &lexicons.movement, VisualType::kMovement},
  };
  for (const auto& rule : rules) {
    if (auto token = first_match(words, *rule.lexicon)) return {rule.type, rule.name, std::move(token)};
  }
  return {VisualType::kHighlight, "default", std::nullopt};
}

}  // namespace guided::plan
