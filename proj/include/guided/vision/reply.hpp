#pragma once

#include <string_view>

#include <nlohmann/json.hpp>

#include "guided/vision/types.hpp"

namespace guided::vision {

// Extracts the first top-level {...} from a model reply and parses it.
// Tolerates code fences, doubled outer braces, unquoted keys, single-quoted
// strings, bare-word values and trailing commas. Throws Error(kParseError).
nlohmann::json parse_reply_object(std::string_view reply);

// The plan document text inside a reply, without fences or chatter. The
// result is strict JSON when the reply contained a parseable object, else the
// trimmed reply unchanged so plan parsing reports it as malformed.
std::string extract_plan_document(std::string_view reply);

// Parsers for the grounding replies. Coordinates in 0-1000 units on images
// larger than 1000 px are rescaled and noted in `warnings`.
// Errors: kParseError (missing/ill-typed field, inverted box), kZeroAreaBox.
BoundingBoxResult parse_box_reply(std::string_view reply, int image_width, int image_height);
TranslationResult parse_translation_reply(std::string_view reply, int image_width, int image_height);
RotationResult parse_rotation_reply(std::string_view reply);

// "x"/"X" and "CW", "clockwise", "CCW", "counterclockwise", "counter clockwise",
// "anticlockwise". nullopt otherwise.
std::optional<RotationAxis> parse_axis(std::string_view s);
std::optional<RotationDirection> parse_direction(std::string_view s);

}  // namespace guided::vision
