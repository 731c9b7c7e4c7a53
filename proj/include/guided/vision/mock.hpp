#pragma once

#include <atomic>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "guided/vision/backend.hpp"

namespace guided::vision {

// Replays canned replies from a fixture directory holding index.json:
//
//   {"capabilities": ["plan", "bbox", ...],            optional, default all
//    "entries": [{"capability": "bbox",
//                 "scene": "s1", "component": "...",   optional match keys
//                 "instruction": "...", "query": "...",
//                 "box": [y0, x0, y1, x1], "attempt": 0,
//                 "reply": "replies/x.txt" | "text": "...",
//                 "mask": "masks/x.png",
//                 "hang": true, "refusal": true, "error": "...", "delay_ms": 5}]}
//
// An entry matches when the capability agrees and every key it sets agrees
// with the request (components and instructions compare case- and
// whitespace-insensitively, boxes to 0.5 px). The entry with the most keys
// wins; ties go to the earlier entry.
class MockBackend : public VisionBackend {
 public:
  static std::shared_ptr<MockBackend> load(const std::filesystem::path& dir);

  std::string name() const override { return "mock:" + id_; }
  std::set<Capability> capabilities() const override { return capabilities_; }
  ProviderReply call(const ProviderRequest& request, std::stop_token stop) override;

  std::size_t call_count() const { return calls_.load(); }

 private:
  struct Entry {
    Capability capability;
    std::optional<std::string> scene;
    std::optional<std::string> component;
    std::optional<std::string> instruction;
    std::optional<std::string> query;
    std::optional<geometry::BoundingBox2D> box;
    std::optional<int> attempt;
    std::string text;
    std::optional<Image> mask;
    bool hang = false;
    bool refusal = false;
    std::optional<std::string> error;
    int delay_ms = 0;

    std::optional<int> score(const ProviderRequest& r) const;
  };

  std::string id_;
  std::set<Capability> capabilities_;
  std::vector<Entry> entries_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace guided::vision
