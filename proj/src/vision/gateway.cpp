#include "guided/vision/gateway.hpp"

#include <condition_variable>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "guided/error.hpp"
#include "guided/text.hpp"
#include "guided/vision/reply.hpp"

namespace guided::vision {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

class SlotGuard {
 public:
  SlotGuard(std::counting_semaphore<>& sem, std::stop_token stop) : sem_(sem) {
    while (!sem_.try_acquire_for(std::chrono::milliseconds(20))) {
      if (stop.stop_requested()) return;
    }
    held_ = true;
  }
  ~SlotGuard() {
    if (held_) sem_.release();
  }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;
  bool held() const { return held_; }

 private:
  std::counting_semaphore<>& sem_;
  bool held_ = false;
};

std::string violation_text(const Error& e) {
  if (const auto* pv = dynamic_cast<const plan::PlanValidationError*>(&e)) {
    std::string out;
    for (const auto& v : pv->violations()) out += "- " + v.to_string() + "\n";
    return out;
  }
  return std::string("- ") + e.what() + "\n";
}

}  // namespace

void GatewayConfig::validate() const {
  if (timeout.count() <= 0) throw Error(ErrorCode::kConfigError, "provider timeout must be positive");
  if (max_in_flight <= 0) throw Error(ErrorCode::kConfigError, "max_in_flight must be positive");
  if (retry.plan_retries < 0 || retry.other_retries < 0 || retry.backoff_base_s < 0) {
    throw Error(ErrorCode::kConfigError, "retry counts and backoff must be non-negative");
  }
}

VisionGateway::VisionGateway(BackendPtr backend, GatewayConfig config, const PromptLibrary* prompts,
                             std::shared_ptr<LatencyRecorder> latency)
    : backend_(std::move(backend)),
      config_(config),
      prompts_(prompts != nullptr ? prompts : &PromptLibrary::shipped()),
      latency_(latency ? std::move(latency) : std::make_shared<LatencyRecorder>()) {
  if (!backend_) throw Error(ErrorCode::kConfigError, "vision gateway needs a backend");
  config_.validate();
  slots_ = std::make_unique<std::counting_semaphore<>>(config_.max_in_flight);
}

bool VisionGateway::supports(Capability c) const { return backend_->capabilities().count(c) != 0; }

void VisionGateway::require(Capability c) const {
  if (!supports(c)) {
    throw Error(ErrorCode::kMissingCapability,
                fmt::format("provider '{}' has no {} capability", backend_->name(), capability_name(c)));
  }
}

int VisionGateway::retries_for(Capability c) const {
  if (config_.eval_mode) return 0;
  return c == Capability::kPlan ? config_.retry.plan_retries : config_.retry.other_retries;
}

void VisionGateway::record(const ProviderRequest& request, const CallContext& ctx, double seconds,
                           CallOutcome outcome) {
  latency_->record({request.capability, ctx.visual_type, ctx.tag, request.attempt, seconds, outcome});
}

void VisionGateway::backoff(int retry, const CallContext& ctx) const {
  const double wait = config_.retry.backoff_base_s * static_cast<double>(1 << (retry - 1));
  if (wait <= 0) return;
  std::mutex mu;
  std::condition_variable_any cv;
  std::unique_lock lock(mu);
  cv.wait_for(lock, ctx.stop, std::chrono::duration<double>(wait), [] { return false; });
  if (ctx.stop.stop_requested()) throw Error(ErrorCode::kCancelled, "cancelled during retry backoff");
}

VisionGateway::Timed VisionGateway::dispatch(const ProviderRequest& request, const CallContext& ctx) {
  const auto start = Clock::now();
  // A cancelled context never reaches the backend; the wait below would
  // otherwise let a fast reply win over the stop request.
  if (ctx.stop.stop_requested()) {
    record(request, ctx, 0.0, CallOutcome::kCancelled);
    throw Error(ErrorCode::kCancelled, fmt::format("{} request cancelled", capability_name(request.capability)));
  }
  SlotGuard slot(*slots_, ctx.stop);
  if (!slot.held()) {
    record(request, ctx, seconds_since(start), CallOutcome::kCancelled);
    throw Error(ErrorCode::kCancelled, "cancelled while waiting for a provider slot");
  }

  struct Shared {
    std::mutex mu;
    std::condition_variable_any cv;
    bool done = false;
    std::optional<ProviderReply> reply;
    std::exception_ptr error;
  };
  auto shared = std::make_shared<Shared>();
  CallOutcome outcome = CallOutcome::kOk;
  {
    // The worker is joined before returning, so `request` outlives it.
    std::jthread worker([backend = backend_, &request, shared](std::stop_token stop) {
      std::optional<ProviderReply> reply;
      std::exception_ptr error;
      try {
        reply = backend->call(request, stop);
      } catch (...) {
        error = std::current_exception();
      }
      std::lock_guard lock(shared->mu);
      shared->reply = std::move(reply);
      shared->error = error;
      shared->done = true;
      shared->cv.notify_all();
    });
    std::unique_lock lock(shared->mu);
    const bool finished =
        shared->cv.wait_until(lock, ctx.stop, start + config_.timeout, [&] { return shared->done; });
    if (!finished) {
      outcome = ctx.stop.stop_requested() ? CallOutcome::kCancelled : CallOutcome::kTimeout;
      lock.unlock();
      worker.request_stop();
    }
  }
  const double seconds = seconds_since(start);
  if (outcome == CallOutcome::kCancelled) {
    record(request, ctx, seconds, outcome);
    throw Error(ErrorCode::kCancelled, fmt::format("{} request cancelled", capability_name(request.capability)));
  }
  if (outcome == CallOutcome::kTimeout) {
    record(request, ctx, seconds, outcome);
    throw Error(ErrorCode::kProviderTimeout,
                fmt::format("{} request exceeded {} ms", capability_name(request.capability), config_.timeout.count()));
  }
  if (shared->error) {
    CallOutcome failed = CallOutcome::kFailed;
    try {
      std::rethrow_exception(shared->error);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kProviderRefusal) failed = CallOutcome::kRefused;
      if (e.code() == ErrorCode::kProviderTimeout) failed = CallOutcome::kTimeout;
      record(request, ctx, seconds, failed);
      throw;
    } catch (const std::exception& e) {
      record(request, ctx, seconds, failed);
      throw Error(ErrorCode::kProviderError, e.what());
    }
  }
  return {std::move(*shared->reply), seconds};
}

template <typename Result, typename Parse>
Result VisionGateway::grounded_call(ProviderRequest request, const CallContext& ctx, Parse&& parse) {
  require(request.capability);
  const int max_retries = retries_for(request.capability);
  for (int attempt = 0;; ++attempt) {
    request.attempt = attempt;
    Timed t = dispatch(request, ctx);
    try {
      Result r = parse(t.reply);
      record(request, ctx, t.seconds, CallOutcome::kOk);
      return r;
    } catch (const Error& e) {
      record(request, ctx, t.seconds, CallOutcome::kFailed);
      if (e.code() != ErrorCode::kParseError || attempt >= max_retries) throw;
      spdlog::info("{} reply unparseable ({}); retry {}", capability_name(request.capability), e.what(), attempt + 1);
      backoff(attempt + 1, ctx);
    }
  }
}

PlanResult VisionGateway::request_task_plan(std::string_view query, const FrameRef& initial,
                                            const CallContext& ctx) {
  require(Capability::kPlan);
  if (text::is_blank(query)) throw Error(ErrorCode::kEmptyQuery, "query is empty");
  std::string base = prompts_->render(PromptId::kPlan);
  if (config_.brand_hint) base += "\n\n" + prompts_->render(PromptId::kBrandHint);
  base += "\n\nQuestion: " + std::string(query);

  ProviderRequest request;
  request.capability = Capability::kPlan;
  request.prompt = base;
  request.frames = {initial};
  request.query = std::string(query);
  const int max_retries = retries_for(Capability::kPlan);
  for (int attempt = 0;; ++attempt) {
    request.attempt = attempt;
    Timed t = dispatch(request, ctx);
    try {
      PlanResult result{plan::parse_plan(extract_plan_document(t.reply.text), std::string(query)), attempt};
      record(request, ctx, t.seconds, CallOutcome::kOk);
      return result;
    } catch (const Error& e) {
      record(request, ctx, t.seconds, CallOutcome::kFailed);
      const bool schema = e.code() == ErrorCode::kMalformedDocument || e.code() == ErrorCode::kSchemaViolation;
      if (!schema || attempt >= max_retries) throw;
      spdlog::info("plan reply rejected ({}); retry {}", e.what(), attempt + 1);
      request.prompt = base + "\n\n" + prompts_->render(PromptId::kFeedback, {{"violations", violation_text(e)}});
      backoff(attempt + 1, ctx);
    }
  }
}

BoundingBoxResult VisionGateway::request_bounding_box(const FrameRef& frame, std::string_view key_component,
                                                      const CallContext& ctx) {
  ProviderRequest request;
  request.capability = Capability::kBoundingBox;
  request.key_component = std::string(key_component);
  request.frames = {frame};
  require(request.capability);
  request.prompt = prompts_->render(PromptId::kBoundingBox, {{"key_component", request.key_component}});
  return grounded_call<BoundingBoxResult>(std::move(request), ctx, [&](const ProviderReply& reply) {
    return parse_box_reply(reply.text, frame.image->width, frame.image->height);
  });
}

TranslationResult VisionGateway::request_translation_target(const FrameRef& frame, std::string_view key_component,
                                                            std::string_view instruction, const CallContext& ctx) {
  ProviderRequest request;
  request.capability = Capability::kTranslation;
  request.key_component = std::string(key_component);
  request.instruction = std::string(instruction);
  request.frames = {frame};
  require(request.capability);
  request.prompt = prompts_->render(PromptId::kTranslation, {{"key_component", request.key_component},
                                                             {"instruction", request.instruction}});
  return grounded_call<TranslationResult>(std::move(request), ctx, [&](const ProviderReply& reply) {
    return parse_translation_reply(reply.text, frame.image->width, frame.image->height);
  });
}

RotationResult VisionGateway::request_rotation_info(const FrameRef& initial, const FrameRef& current,
                                                    std::string_view key_component, std::string_view instruction,
                                                    const CallContext& ctx) {
  if (initial.image == nullptr || current.image == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "rotation query needs the initial and the current frame");
  }
  ProviderRequest request;
  request.capability = Capability::kRotation;
  request.key_component = std::string(key_component);
  request.instruction = std::string(instruction);
  request.frames = {initial, current};
  require(request.capability);
  request.prompt = prompts_->render(PromptId::kRotation, {{"key_component", request.key_component},
                                                          {"instruction", request.instruction}});
  return grounded_call<RotationResult>(std::move(request), ctx,
                                       [](const ProviderReply& reply) { return parse_rotation_reply(reply.text); });
}

SegmentationMask VisionGateway::request_segmentation(const FrameRef& frame, const geometry::BoundingBox2D& box,
                                                     const CallContext& ctx) {
  const auto rect = geometry::pixel_rect(box, frame.image->width, frame.image->height);
  if (!box.ordered() || rect.width <= 0 || rect.height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "segmentation box is empty: " + box.to_string());
  }
  ProviderRequest request;
  request.capability = Capability::kSegmentation;
  request.frames = {frame};
  request.box = box;
  return grounded_call<SegmentationMask>(std::move(request), ctx, [&](const ProviderReply& reply) {
    if (!reply.mask) throw Error(ErrorCode::kProviderError, "segmentation reply carries no mask");
    SegmentationMask mask = SegmentationMask::from_image(*reply.mask);
    if (mask.width != rect.width || mask.height != rect.height) {
      throw Error(ErrorCode::kDimensionMismatch, fmt::format("mask is {}x{}, crop is {}x{}", mask.width, mask.height,
                                                             rect.width, rect.height));
    }
    if (mask.count() == 0) throw Error(ErrorCode::kEmptyMask, "segmentation mask is empty for " + box.to_string());
    return mask;
  });
}

}  // namespace guided::vision
