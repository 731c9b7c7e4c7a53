#include "guided/vision/mock.hpp"

#include <cmath>
#include <condition_variable>
#include <mutex>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "guided/error.hpp"
#include "guided/text.hpp"

namespace guided::vision {

using nlohmann::json;

namespace {

std::optional<std::string> opt_string(const json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return j.at(key).get<std::string>();
}

bool same_box(const geometry::BoundingBox2D& a, const geometry::BoundingBox2D& b) {
  return std::abs(a.y_min - b.y_min) <= 0.5 && std::abs(a.x_min - b.x_min) <= 0.5 &&
         std::abs(a.y_max - b.y_max) <= 0.5 && std::abs(a.x_max - b.x_max) <= 0.5;
}

void sleep_unless_stopped(std::stop_token stop, std::optional<std::chrono::milliseconds> wait) {
  std::mutex mu;
  std::condition_variable_any cv;
  std::unique_lock lock(mu);
  if (wait) cv.wait_for(lock, stop, *wait, [] { return false; });
  else cv.wait(lock, stop, [] { return false; });
}

}  // namespace

std::optional<int> MockBackend::Entry::score(const ProviderRequest& r) const {
  if (capability != r.capability) return std::nullopt;
  int s = 0;
  const auto phrase_matches = [&](const std::optional<std::string>& want, const std::string& have) {
    if (!want) return true;
    ++s;
    return text::normalize_phrase(*want) == text::normalize_phrase(have);
  };
  if (scene) {
    ++s;
    if (r.frames.empty() || r.frames.back().scene_id != *scene) return std::nullopt;
  }
  if (!phrase_matches(component, r.key_component)) return std::nullopt;
  if (!phrase_matches(instruction, r.instruction)) return std::nullopt;
  if (!phrase_matches(query, r.query)) return std::nullopt;
  if (box) {
    ++s;
    if (!r.box || !same_box(*box, *r.box)) return std::nullopt;
  }
  if (attempt) {
    ++s;
    if (*attempt != r.attempt) return std::nullopt;
  }
  return s;
}

std::shared_ptr<MockBackend> MockBackend::load(const std::filesystem::path& dir) {
  json index;
  try {
    index = json::parse(text::read_file((dir / "index.json").string()));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBundleFormat, fmt::format("{}: {}", (dir / "index.json").string(), e.what()));
  }
  auto mock = std::make_shared<MockBackend>();
  mock->id_ = dir.parent_path().filename().string();
  try {
    if (index.contains("capabilities")) {
      for (const auto& c : index.at("capabilities")) {
        auto cap = parse_capability(c.get<std::string>());
        if (!cap) throw Error(ErrorCode::kBundleFormat, "unknown capability " + c.dump());
        mock->capabilities_.insert(*cap);
      }
    } else {
      mock->capabilities_.insert(std::begin(kAllCapabilities), std::end(kAllCapabilities));
    }
    std::size_t n = 0;
    for (const auto& e : index.at("entries")) {
      const std::string where = fmt::format("{} entries[{}]", (dir / "index.json").string(), n++);
      Entry entry{};
      auto cap = parse_capability(e.at("capability").get<std::string>());
      if (!cap) throw Error(ErrorCode::kBundleFormat, where + ": unknown capability");
      entry.capability = *cap;
      entry.scene = opt_string(e, "scene");
      entry.component = opt_string(e, "component");
      entry.instruction = opt_string(e, "instruction");
      entry.query = opt_string(e, "query");
      if (e.contains("box")) {
        const auto b = e.at("box").get<std::vector<double>>();
        if (b.size() != 4) throw Error(ErrorCode::kBundleFormat, where + ": box needs 4 numbers");
        entry.box = geometry::BoundingBox2D{b[0], b[1], b[2], b[3]};
      }
      if (e.contains("attempt")) entry.attempt = e.at("attempt").get<int>();
      if (e.contains("reply")) entry.text = text::read_file((dir / e.at("reply").get<std::string>()).string());
      if (e.contains("text")) entry.text = e.at("text").get<std::string>();
      if (e.contains("mask")) {
        const auto bytes = text::read_binary_file((dir / e.at("mask").get<std::string>()).string());
        entry.mask = decode_png(bytes);
      }
      entry.hang = e.value("hang", false);
      entry.refusal = e.value("refusal", false);
      entry.error = opt_string(e, "error");
      entry.delay_ms = e.value("delay_ms", 0);
      mock->entries_.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBundleFormat, fmt::format("{}: {}", (dir / "index.json").string(), e.what()));
  }
  return mock;
}

ProviderReply MockBackend::call(const ProviderRequest& request, std::stop_token stop) {
  ++calls_;
  const Entry* best = nullptr;
  int best_score = -1;
  for (const auto& e : entries_) {
    const auto s = e.score(request);
    if (s && *s > best_score) {
      best = &e;
      best_score = *s;
    }
  }
  if (best == nullptr) {
    throw Error(ErrorCode::kProviderError,
                fmt::format("no fixture reply for {} (scene '{}', component '{}')", capability_name(request.capability),
                            request.frames.empty() ? "" : request.frames.back().scene_id, request.key_component));
  }
  if (best->hang) {
    sleep_unless_stopped(stop, std::nullopt);
    throw Error(ErrorCode::kCancelled, "mock call abandoned");
  }
  if (best->delay_ms > 0) sleep_unless_stopped(stop, std::chrono::milliseconds(best->delay_ms));
  if (best->refusal) throw Error(ErrorCode::kProviderRefusal, best->text.empty() ? "request refused" : best->text);
  if (best->error) throw Error(ErrorCode::kProviderError, *best->error);
  return {best->text, best->mask};
}

}  // namespace guided::vision
