#include <random>

#include <gtest/gtest.h>

#include "guided/plan/classifier.hpp"

using namespace guided::plan;

TEST(Classifier, AppendixExamples) {
  auto waiting = classify_visual_type("Let the food stand for 30s");
  EXPECT_EQ(waiting.type, VisualType::kWidget);
  EXPECT_EQ(waiting.rule, "waiting");
  EXPECT_EQ(waiting.token, "stand for");

  auto tool = classify_visual_type("Mix the ingredients with a whisk");
  EXPECT_EQ(tool.type, VisualType::kTool);
  EXPECT_EQ(tool.rule, "tool");
  EXPECT_EQ(tool.token, "whisk");

  auto highlight = classify_visual_type("press start button on the rice cooker");
  EXPECT_EQ(highlight.type, VisualType::kHighlight);
  EXPECT_EQ(highlight.rule, "default");
  EXPECT_FALSE(highlight.token.has_value());

  EXPECT_EQ(classify_visual_type("Pull the filament out").type, VisualType::kHandGesture);
  EXPECT_EQ(classify_visual_type("Return the basket to the air fryer to resume cooking").type,
            VisualType::kMovement);
}

TEST(Classifier, MatchesWholeWordsOnly) {
  // "pullover" must not fire the "pull" gesture token.
  EXPECT_EQ(classify_visual_type("Fold the pullover").type, VisualType::kHighlight);
  EXPECT_EQ(classify_visual_type("WAIT for the light").type, VisualType::kWidget);
}

TEST(Classifier, ShippedLexiconFileMatchesBuiltinDefaults) {
  const auto shipped = ClassifierLexicons::load(std::string(GUIDED_DATA_DIR) + "/lexicons.txt");
  const auto& builtin = ClassifierLexicons::defaults();
  EXPECT_EQ(shipped.waiting, builtin.waiting);
  EXPECT_EQ(shipped.tool, builtin.tool);
  EXPECT_EQ(shipped.gesture, builtin.gesture);
  EXPECT_EQ(shipped.movement, builtin.movement);
}

TEST(Classifier, CustomLexiconsAndParseErrors) {
  auto lex = ClassifierLexicons::parse("[waiting]\nsimmer\n[tool]\nladle # comment\n[gesture]\n[movement]\n");
  EXPECT_EQ(classify_visual_type("Let it simmer", lex).type, VisualType::kWidget);
  EXPECT_EQ(classify_visual_type("Stir with a ladle", lex).type, VisualType::kTool);
  EXPECT_THROW(ClassifierLexicons::parse("orphan\n"), guided::Error);
  EXPECT_THROW(ClassifierLexicons::parse("[colour]\nred\n"), guided::Error);
}

// For synthetic instructions mixing tokens from several categories, the
// earliest category in the fixed order wins.
TEST(Classifier, DecisionOrderProperty) {
  const auto& lex = ClassifierLexicons::defaults();
  const std::vector<const std::vector<std::string>*> categories{&lex.waiting, &lex.tool, &lex.gesture,
                                                                &lex.movement};
  const VisualType expected_type[] = {VisualType::kWidget, VisualType::kTool, VisualType::kHandGesture,
                                      VisualType::kMovement};
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::pair<int, std::string>> parts;
    for (int c = 0; c < 4; ++c) {
      if (rng() % 2 == 0) continue;
      const auto& words = *categories[static_cast<std::size_t>(c)];
      parts.emplace_back(c, words[rng() % words.size()]);
    }
    if (parts.size() < 2) {
      parts.emplace_back(0, lex.waiting[rng() % lex.waiting.size()]);
      parts.emplace_back(1, lex.tool[rng() % lex.tool.size()]);
    }
    std::shuffle(parts.begin(), parts.end(), rng);
    std::string instruction = "then";
    int earliest = 4;
    for (const auto& [c, token] : parts) {
      instruction += " " + token + " the part";
      earliest = std::min(earliest, c);
    }
    EXPECT_EQ(classify_visual_type(instruction).type, expected_type[earliest]) << instruction;
  }
}
