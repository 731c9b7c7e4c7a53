#include "guided/vision/reply.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "guided/error.hpp"
#include "guided/text.hpp"

namespace guided::vision {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorCode::kParseError, what); }

// Lenient recursive-descent reader for the JSON-like text models produce.
class RelaxedParser {
 public:
  explicit RelaxedParser(std::string_view s) : s_(s) {}

  json document() {
    json v = value();
    skip_ws();
    if (pos_ != s_.size()) fail(fmt::format("unexpected text at offset {}", pos_));
    return v;
  }

 private:
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(fmt::format("expected '{}' at offset {}", c, pos_));
    ++pos_;
  }

  json value() {
    skip_ws();
    switch (peek()) {
      case '\0': fail("unexpected end of reply");
      case '{': return object();
      case '[': return array();
      case '"':
      case '\'': return quoted();
      default: return bare();
    }
  }

  json object() {
    ++pos_;
    skip_ws();
    if (peek() == '{') {  // {{ ... }} as written in format clauses
      json inner = object();
      expect('}');
      return inner;
    }
    json obj = json::object();
    for (;;) {
      skip_ws();
      if (peek() == '}') break;
      const std::string key = (peek() == '"' || peek() == '\'') ? quoted().get<std::string>() : bare_key();
      expect(':');
      obj[key] = value();
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() != '}') fail(fmt::format("expected ',' or '}}' at offset {}", pos_));
    }
    ++pos_;
    return obj;
  }

  json array() {
    ++pos_;
    json arr = json::array();
    for (;;) {
      skip_ws();
      if (peek() == ']') break;
      arr.push_back(value());
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() != ']') fail(fmt::format("expected ',' or ']' at offset {}", pos_));
    }
    ++pos_;
    return arr;
  }

  json quoted() {
    const char quote = s_[pos_++];
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != quote) {
      char c = s_[pos_++];
      if (c == '\\' && pos_ < s_.size()) {
        c = s_[pos_++];
        if (c == 'n') c = '\n';
        else if (c == 't') c = '\t';
      }
      out.push_back(c);
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  std::string bare_key() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ':' && s_[pos_] != '}' && s_[pos_] != ',') ++pos_;
    std::string key = text::trim(s_.substr(start, pos_ - start));
    if (key.empty()) fail(fmt::format("empty key at offset {}", start));
    return key;
  }

  json bare() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '}') ++pos_;
    const std::string word = text::trim(s_.substr(start, pos_ - start));
    if (word.empty()) fail(fmt::format("missing value at offset {}", start));
    if (word == "true") return true;
    if (word == "false") return false;
    if (word == "null") return nullptr;
    char* end = nullptr;
    const double number = std::strtod(word.c_str(), &end);
    if (end == word.c_str() + word.size()) return number;
    return word;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

// [first '{', matching '}'] honouring quoted strings; npos end if unbalanced.
std::string_view outer_object(std::string_view reply) {
  const std::size_t open = reply.find('{');
  if (open == std::string_view::npos) return {};
  int depth = 0;
  char quote = 0;
  for (std::size_t i = open; i < reply.size(); ++i) {
    const char c = reply[i];
    if (quote != 0) {
      if (c == '\\') ++i;
      else if (c == quote) quote = 0;
      continue;
    }
    if (c == '"') quote = c;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return reply.substr(open, i - open + 1);
  }
  return reply.substr(open);
}

double number_of(const json& v, std::string_view field) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (!s.empty() && end == s.c_str() + s.size()) return d;
  }
  fail(fmt::format("'{}' holds a non-numeric entry: {}", field, v.dump()));
}

std::vector<double> numbers(const json& obj, const char* field, std::size_t n) {
  if (!obj.contains(field)) fail(fmt::format("reply has no '{}'", field));
  const json& arr = obj.at(field);
  if (!arr.is_array() || arr.size() != n) fail(fmt::format("'{}' must be a list of {} numbers", field, n));
  std::vector<double> out;
  for (const auto& v : arr) out.push_back(number_of(v, field));
  return out;
}

std::string name_of(const json& obj, std::vector<std::string>& warnings) {
  if (obj.contains("name")) {
    const json& n = obj.at("name");
    return n.is_string() ? n.get<std::string>() : n.dump();
  }
  warnings.emplace_back("reply has no 'name'");
  return {};
}

geometry::BoundingBox2D read_box(const json& obj) {
  const auto v = numbers(obj, "pos", 4);
  const geometry::BoundingBox2D box{v[0], v[1], v[2], v[3]};
  if (box.y_min > box.y_max || box.x_min > box.x_max) fail("inverted box " + box.to_string());
  return box;
}

geometry::BoundingBox2D finish_box(const geometry::BoundingBox2D& box, int w, int h) {
  const auto clamped = box.clamped(w, h);
  if (!(clamped.width() > 0 && clamped.height() > 0)) {
    throw Error(ErrorCode::kZeroAreaBox, "box has no area inside the image: " + box.to_string());
  }
  return clamped;
}

void note_rescale(std::vector<std::string>& warnings, int w, int h) {
  warnings.push_back(fmt::format("coordinates read as 0-1000 units and rescaled to {}x{} px", w, h));
  spdlog::warn("grounding reply: {}", warnings.back());
}

}  // namespace

json parse_reply_object(std::string_view reply) {
  const std::string_view body = outer_object(reply);
  if (body.empty()) fail("reply contains no JSON object");
  json strict = json::parse(body, nullptr, false);
  if (!strict.is_discarded() && strict.is_object()) return strict;
  json relaxed = RelaxedParser(body).document();
  if (!relaxed.is_object()) fail("reply is not an object");
  return relaxed;
}

std::string extract_plan_document(std::string_view reply) {
  try {
    return parse_reply_object(reply).dump();
  } catch (const Error&) {
    return text::trim(reply);
  }
}

BoundingBoxResult parse_box_reply(std::string_view reply, int image_width, int image_height) {
  const json obj = parse_reply_object(reply);
  BoundingBoxResult r;
  r.name = name_of(obj, r.warnings);
  geometry::BoundingBox2D box = read_box(obj);
  if (geometry::looks_normalized(box, image_width, image_height)) {
    box = geometry::denormalize(box, image_width, image_height);
    note_rescale(r.warnings, image_width, image_height);
  }
  r.box = finish_box(box, image_width, image_height);
  return r;
}

TranslationResult parse_translation_reply(std::string_view reply, int image_width, int image_height) {
  const json obj = parse_reply_object(reply);
  TranslationResult r;
  r.name = name_of(obj, r.warnings);
  geometry::BoundingBox2D box = read_box(obj);
  const auto t = numbers(obj, "target_pos", 2);
  geometry::Point2 target{t[0], t[1]};
  const bool target_in_units = t[0] >= 0 && t[0] <= 1000 && t[1] >= 0 && t[1] <= 1000;
  if (geometry::looks_normalized(box, image_width, image_height) && target_in_units) {
    box = geometry::denormalize(box, image_width, image_height);
    target = geometry::denormalize(target, image_width, image_height);
    note_rescale(r.warnings, image_width, image_height);
  }
  r.box = finish_box(box, image_width, image_height);
  const geometry::Point2 clamped{std::clamp(target.x(), 0.0, image_width - 1.0),
                                 std::clamp(target.y(), 0.0, image_height - 1.0)};
  if (clamped != target) {
    r.warnings.push_back(fmt::format("target ({}, {}) clamped to ({}, {})", target.x(), target.y(),
                                     clamped.x(), clamped.y()));
    spdlog::warn("translation reply: {}", r.warnings.back());
  }
  r.target = clamped;
  return r;
}

std::optional<RotationAxis> parse_axis(std::string_view s) {
  const std::string t = text::normalize_token(s);
  if (t == "x") return RotationAxis::kX;
  if (t == "y") return RotationAxis::kY;
  if (t == "z") return RotationAxis::kZ;
  return std::nullopt;
}

std::optional<RotationDirection> parse_direction(std::string_view s) {
  const std::string t = text::normalize_token(s);
  if (t == "cw" || t == "clockwise") return RotationDirection::kClockwise;
  if (t == "ccw" || t == "counterclockwise" || t == "counter_clockwise" || t == "anticlockwise" ||
      t == "anti_clockwise") {
    return RotationDirection::kCounterclockwise;
  }
  return std::nullopt;
}

RotationResult parse_rotation_reply(std::string_view reply) {
  const json obj = parse_reply_object(reply);
  if (!obj.contains("rotation")) fail("reply has no 'rotation'");
  const json& rot = obj.at("rotation");
  if (!rot.is_array() || rot.size() != 2 || !rot[0].is_string() || !rot[1].is_string()) {
    fail("'rotation' must be [axis, direction]");
  }
  const auto axis = parse_axis(rot[0].get<std::string>());
  if (!axis) fail("unknown rotation axis '" + rot[0].get<std::string>() + "'");
  const auto direction = parse_direction(rot[1].get<std::string>());
  if (!direction) fail("unknown rotation direction '" + rot[1].get<std::string>() + "'");
  return {*axis, *direction};
}

}  // namespace guided::vision
