#pragma once

#include <memory>
#include <optional>
#include <set>
#include <stop_token>
#include <string>
#include <vector>

#include "guided/geometry/box.hpp"
#include "guided/image.hpp"
#include "guided/vision/types.hpp"

namespace guided::vision {

struct FrameRef {
  std::string scene_id;
  const Image* image = nullptr;
};

struct ProviderRequest {
  Capability capability = Capability::kPlan;
  std::string prompt;               // empty for segmentation
  std::vector<FrameRef> frames;     // rotation sends (initial, current)
  // Structured copies of what the prompt encodes; fixture lookup keys.
  std::string key_component;
  std::string instruction;
  std::string query;
  std::optional<geometry::BoundingBox2D> box;
  int attempt = 0;
};

struct ProviderReply {
  std::string text;                 // raw model output
  std::optional<Image> mask;        // segmentation only
};

// Transport to one or more external services. Implementations must be safe to
// call concurrently and should return early once `stop` is requested.
// Failures are thrown as Error(kProviderError / kProviderRefusal / kProviderTimeout).
class VisionBackend {
 public:
  virtual ~VisionBackend() = default;
  virtual std::string name() const = 0;
  virtual std::set<Capability> capabilities() const = 0;
  virtual ProviderReply call(const ProviderRequest& request, std::stop_token stop) = 0;
};

using BackendPtr = std::shared_ptr<VisionBackend>;

}  // namespace guided::vision
