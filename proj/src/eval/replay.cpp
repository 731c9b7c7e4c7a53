#include "guided/eval/replay.hpp"

#include <algorithm>
#include <future>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "guided/session/session.hpp"
#include "guided/text.hpp"
#include "guided/vision/mock.hpp"

namespace guided::eval {

namespace fs = std::filesystem;
using guidance::PrimitiveKind;
using nlohmann::json;

namespace {

std::vector<vision::LatencySample> samples_for(const std::vector<vision::LatencySample>& all, const std::string& tag) {
  std::vector<vision::LatencySample> out;
  for (const auto& s : all) {
    if (s.tag == tag && s.outcome == vision::CallOutcome::kOk) out.push_back(s);
  }
  return out;
}

std::optional<double> summed(const std::vector<vision::LatencySample>& samples,
                             std::initializer_list<vision::Capability> caps) {
  std::optional<double> total;
  for (const auto& s : samples) {
    if (std::find(caps.begin(), caps.end(), s.capability) != caps.end()) total = total.value_or(0.0) + s.seconds;
  }
  return total;
}

bool used_generated_tool(const guidance::CompiledStep& step) {
  for (const auto& p : step.primitives) {
    if (const auto* tool = std::get_if<guidance::ToolPayload>(&p.payload)) {
      if (tool->asset.fallback_generated) return true;
    }
  }
  return false;
}

// Mechanical checks against the labelled provider outputs; a human verdict
// in the labels takes precedence.
class StepScorer {
 public:
  StepScorer(const StepLabel& label, const plan::PlanStep* planned, const StepReplay& step,
             const geometry::SceneSnapshot& scene, const ReplayOptions& options,
             const std::vector<vision::LatencySample>& samples)
      : label_(label), planned_(planned), step_(step), scene_(scene), options_(options), samples_(samples) {}

  ComponentOutcome score(ComponentId id) const {
    ComponentOutcome c{id};
    c.correct = verdict(id);
    c.latency_s = latency(id);
    return c;
  }

 private:
  const guidance::Grounding* grounding() const { return step_.compiled ? &step_.compiled->grounding : nullptr; }

  std::optional<bool> verdict(ComponentId id) const {
    if (id == ComponentId::kToolGen && !step_.outcome.generated_tool) return std::nullopt;
    if (const auto it = label_.components.find(id); it != label_.components.end()) return it->second;
    const auto* g = grounding();
    switch (id) {
      case ComponentId::kBox:
        if (!label_.box) return std::nullopt;
        return g && g->box && geometry::iou(*g->box, *label_.box) >= options_.box_iou_threshold;
      case ComponentId::kEndPosition: {
        if (!label_.target) return std::nullopt;
        if (!g || !g->target) return false;
        const double diag = std::hypot(scene_.image.width, scene_.image.height);
        return (*g->target - *label_.target).norm() <= options_.target_tolerance * diag;
      }
      case ComponentId::kSegmentation:
        if (g && g->mask_coverage) return true;
        if (step_.outcome.error == error_code_name(ErrorCode::kEmptyMask) ||
            step_.outcome.error == error_code_name(ErrorCode::kDimensionMismatch)) {
          return false;
        }
        return std::nullopt;
      case ComponentId::kRotationInfo:
        if (!label_.rotation) return std::nullopt;
        if (!g || !g->rotation) return false;
        return text::to_lower(label_.rotation->first) == vision::axis_name(g->rotation->axis) &&
               text::to_lower(label_.rotation->second) == text::to_lower(vision::direction_name(g->rotation->direction));
      case ComponentId::kGestureType: {
        if (!label_.gesture) return std::nullopt;
        const auto want = plan::parse_gesture(*label_.gesture);
        return planned_ != nullptr && want && planned_->gesture() == want;
      }
      case ComponentId::kPlacement:
      case ComponentId::kToolGen:
        return std::nullopt;  // human verdicts only
    }
    return std::nullopt;
  }

  std::optional<double> latency(ComponentId id) const {
    using vision::Capability;
    switch (id) {
      case ComponentId::kBox:
        return step_.outcome.category == Category::kTranslation ? summed(samples_, {Capability::kTranslation})
                                                                : summed(samples_, {Capability::kBoundingBox});
      case ComponentId::kSegmentation: return summed(samples_, {Capability::kSegmentation});
      case ComponentId::kRotationInfo: return summed(samples_, {Capability::kRotation});
      default: return std::nullopt;
    }
  }

  const StepLabel& label_;
  const plan::PlanStep* planned_;
  const StepReplay& step_;
  const geometry::SceneSnapshot& scene_;
  const ReplayOptions& options_;
  const std::vector<vision::LatencySample>& samples_;
};

std::string kind_category(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::kBox3d:
    case PrimitiveKind::kParticleEmitter: return "highlight";
    case PrimitiveKind::kImagePlaneAnimation:
    case PrimitiveKind::kArcArrow: return "movement";
    case PrimitiveKind::kGesturePlacement: return "gesture";
    case PrimitiveKind::kToolPlacement: return "tool";
    case PrimitiveKind::kTimerWidget: return "widget";
  }
  return "?";
}

}  // namespace

std::optional<ReplayMode> parse_replay_mode(std::string_view s) {
  if (s == "mock") return ReplayMode::kMock;
  if (s == "live") return ReplayMode::kLive;
  return std::nullopt;
}

std::vector<StepOutcome> ReplayResult::outcomes() const {
  std::vector<StepOutcome> out;
  for (const auto& s : steps) out.push_back(s.outcome);
  return out;
}

ProviderSource make_provider_source(const ReplayOptions& options) {
  if (options.mode == ReplayMode::kLive) {
    if (!options.provider_config) throw Error(ErrorCode::kConfigError, "live replay needs a provider config");
    auto setup = vision::load_provider_config(*options.provider_config, options.env);
    return [setup](const FixtureBundle&) { return setup; };
  }
  return [](const FixtureBundle& bundle) {
    vision::ProviderSetup setup;
    setup.backend = vision::MockBackend::load(bundle.provider_dir());
    return setup;
  };
}

ReplayResult replay(const FixtureBundle& bundle, const ReplayOptions& options) {
  return replay(bundle, options, make_provider_source(options));
}

ReplayResult replay(const FixtureBundle& bundle, const ReplayOptions& options, const ProviderSource& providers) {
  auto setup = providers(bundle);
  setup.gateway.eval_mode = true;
  auto gateway = std::make_shared<vision::VisionGateway>(setup.backend, setup.gateway);
  const guidance::GuidanceCompiler compiler(gateway, nullptr, options.compiler);

  ReplayResult result;
  result.bundle_id = bundle.bundle_id();
  const auto initial = bundle.scene(bundle.initial_scene());
  try {
    vision::CallContext ctx;
    ctx.tag = bundle.bundle_id() + "/plan";
    result.plan = gateway->request_task_plan(bundle.query(), {initial->id, &initial->image}, ctx).plan;
  } catch (const Error& e) {
    result.plan_error = fmt::format("{}: {}", error_code_name(e.code()), e.what());
    spdlog::warn("{}: plan request failed: {}", bundle.bundle_id(), e.what());
  }

  const auto& labels = bundle.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const StepLabel& label = labels[i];
    StepReplay step;
    StepOutcome& o = step.outcome;
    o.bundle_id = bundle.bundle_id();
    o.step = i;
    o.expected_type = label.expected_type;
    o.category = label.category();

    const plan::PlanStep* planned =
        result.plan && i < result.plan->steps.size() ? &result.plan->steps[i] : nullptr;
    const auto snapshot = bundle.scene(bundle.step_scenes()[i]);
    const std::string tag = fmt::format("{}/{}", bundle.bundle_id(), i);
    if (planned != nullptr) {
      o.generated_type = planned->visual_type();
      o.instruction_correct = label.instruction_correct;
      o.type_correct = planned->visual_type() == label.expected_type;
      o.component_correct = text::normalize_phrase(planned->target()) == text::normalize_phrase(label.expected_component);
      guidance::CompileInput input;
      input.step_index = i;
      input.snapshot = snapshot;
      input.initial = initial;
      input.tag = tag;
      try {
        step.compiled = compiler.compile_step(*planned, input);
      } catch (const Error& e) {
        o.error = std::string(error_code_name(e.code()));
        spdlog::info("{}: {}", tag, e.what());
      }
    }
    if (step.compiled) {
      for (const auto k : step.compiled->kinds()) o.kinds.emplace_back(guidance::kind_name(k));
      o.latency_s = step.compiled->timing.total_s;
      o.generated_tool = used_generated_tool(*step.compiled);
    }
    if (label.guidance_correct) {
      o.guidance_correct = *label.guidance_correct && step.compiled.has_value() &&
                           (!label.kinds || *label.kinds == o.kinds);
    }
    const auto samples = samples_for(gateway->latency().samples(), tag);
    const StepScorer scorer(label, planned, step, *snapshot, options, samples);
    for (const ComponentId id : components_of(o.category)) o.components.push_back(scorer.score(id));
    result.steps.push_back(std::move(step));
  }
  result.samples = gateway->latency().samples();
  return result;
}

std::vector<ReplayResult> replay_all(const std::vector<FixtureBundle>& bundles, const ReplayOptions& options) {
  const ProviderSource providers = make_provider_source(options);
  std::vector<ReplayResult> results(bundles.size());
  const std::size_t width = std::max<std::size_t>(1, options.parallelism);
  for (std::size_t begin = 0; begin < bundles.size(); begin += width) {
    std::vector<std::future<ReplayResult>> batch;
    const std::size_t end = std::min(bundles.size(), begin + width);
    for (std::size_t i = begin; i < end; ++i) {
      batch.push_back(std::async(std::launch::async, [&, i] { return replay(bundles[i], options, providers); }));
    }
    for (std::size_t i = begin; i < end; ++i) results[i] = batch[i - begin].get();
  }
  return results;
}

std::vector<session::ProtocolMessage> run_session(const FixtureBundle& bundle, const ReplayOptions& options) {
  const auto setup = make_provider_source(options)(bundle);
  auto gateway = std::make_shared<vision::VisionGateway>(setup.backend, setup.gateway);
  auto compiler = std::make_shared<guidance::GuidanceCompiler>(gateway, nullptr, options.compiler);
  session::EngineOptions engine_options;
  engine_options.next_session_id = [n = 0]() mutable { return fmt::format("session-{}", ++n); };
  session::SessionEngine engine(std::make_shared<session::GuidancePipeline>(compiler), engine_options);

  session::FrameStore frames;
  const auto upload = [&](const std::string& scene_id, std::size_t step) {
    auto [ref, blobs] = session::snapshot_to_ref(*bundle.scene(scene_id), fmt::format("{}/{}", scene_id, step));
    for (auto& f : blobs) frames.put(std::move(f));
    return ref;
  };

  std::vector<session::ProtocolMessage> out;
  const auto send = [&](session::ProtocolMessage m) {
    for (auto& r : engine.handle(m, frames)) out.push_back(std::move(r));
  };
  send({session::MessageKind::kQuery, "", {{"query", bundle.query()}, {"snapshot", upload(bundle.initial_scene(), 0)}}});
  if (out.empty() || out.front().kind != session::MessageKind::kPlanReady) return out;
  const std::string sid = out.front().session_id;
  for (std::size_t i = 1; i < bundle.step_scenes().size(); ++i) {
    send({session::MessageKind::kAdvance, sid, {{"snapshot", upload(bundle.step_scenes()[i], i)}}});
  }
  return out;
}

json transcript_json(const std::vector<session::ProtocolMessage>& messages) {
  json out = json::array();
  for (const auto& m : messages) {
    json j = session::message_to_json(m);
    j["payload"].erase("timing");
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<std::vector<std::string>> transcript_kinds(const std::vector<session::ProtocolMessage>& messages) {
  std::vector<std::vector<std::string>> out;
  for (const auto& m : messages) {
    if (m.kind != session::MessageKind::kGuidanceReady) continue;
    std::vector<std::string> kinds;
    for (const auto& p : m.payload.at("scene_graph").at("primitives")) kinds.push_back(p.at("kind").get<std::string>());
    out.push_back(std::move(kinds));
  }
  return out;
}

std::string guidance_category(const std::vector<std::string>& kinds) {
  if (kinds.empty()) return "none";
  const auto k = guidance::parse_kind(kinds.front());
  return k ? kind_category(*k) : "?";
}

}  // namespace guided::eval
