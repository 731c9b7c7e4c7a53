#pragma once

#include <chrono>
#include <memory>
#include <semaphore>
#include <stop_token>
#include <string_view>

#include "guided/plan/plan.hpp"
#include "guided/vision/backend.hpp"
#include "guided/vision/latency.hpp"
#include "guided/vision/prompts.hpp"

namespace guided::vision {

struct RetryPolicy {
  int plan_retries = 2;           // on malformed or schema-violating plans
  int other_retries = 1;          // on unparseable grounding replies
  double backoff_base_s = 0.5;    // wait before retry n is base * 2^(n-1)
};

struct GatewayConfig {
  std::chrono::milliseconds timeout{30000};
  int max_in_flight = 4;
  RetryPolicy retry;
  // One attempt per call and no corrective feedback.
  bool eval_mode = false;
  bool brand_hint = true;

  void validate() const;  // Error(kConfigError)
};

struct CallContext {
  std::optional<plan::VisualType> visual_type;
  std::string tag;
  std::stop_token stop;
};

struct PlanResult {
  plan::TaskPlan plan;
  int retries = 0;
};

// The provider handle shared by sessions and the eval harness. Every backend
// round trip records one latency sample. Timeouts and refusals are never
// retried.
class VisionGateway {
 public:
  explicit VisionGateway(BackendPtr backend, GatewayConfig config = {},
                         const PromptLibrary* prompts = nullptr,
                         std::shared_ptr<LatencyRecorder> latency = nullptr);

  PlanResult request_task_plan(std::string_view query, const FrameRef& initial, const CallContext& ctx = {});
  BoundingBoxResult request_bounding_box(const FrameRef& frame, std::string_view key_component,
                                         const CallContext& ctx = {});
  TranslationResult request_translation_target(const FrameRef& frame, std::string_view key_component,
                                                std::string_view instruction, const CallContext& ctx = {});
  RotationResult request_rotation_info(const FrameRef& initial, const FrameRef& current,
                                       std::string_view key_component, std::string_view instruction,
                                       const CallContext& ctx = {});
  // Mask over pixel_rect(box) of the frame. Errors: kEmptyMask, kDimensionMismatch.
  SegmentationMask request_segmentation(const FrameRef& frame, const geometry::BoundingBox2D& box,
                                        const CallContext& ctx = {});

  bool supports(Capability c) const;
  const GatewayConfig& config() const { return config_; }
  LatencyRecorder& latency() { return *latency_; }
  std::shared_ptr<LatencyRecorder> latency_handle() const { return latency_; }
  const PromptLibrary& prompts() const { return *prompts_; }

 private:
  struct Timed {
    ProviderReply reply;
    double seconds = 0;
  };

  void require(Capability c) const;
  Timed dispatch(const ProviderRequest& request, const CallContext& ctx);
  void record(const ProviderRequest& request, const CallContext& ctx, double seconds, CallOutcome outcome);
  void backoff(int retry, const CallContext& ctx) const;
  int retries_for(Capability c) const;

  template <typename Result, typename Parse>
  Result grounded_call(ProviderRequest request, const CallContext& ctx, Parse&& parse);

  BackendPtr backend_;
  GatewayConfig config_;
  const PromptLibrary* prompts_;
  std::shared_ptr<LatencyRecorder> latency_;
  std::unique_ptr<std::counting_semaphore<>> slots_;
};

}  // namespace guided::vision
