#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "guided/eval/bundle.hpp"
#include "guided/guidance/compiler.hpp"
#include "guided/session/protocol.hpp"
#include "guided/vision/live.hpp"

namespace guided::eval {

enum class ReplayMode { kMock, kLive };
std::optional<ReplayMode> parse_replay_mode(std::string_view s);  // "mock", "live"

struct ReplayOptions {
  ReplayMode mode = ReplayMode::kMock;
  std::optional<std::filesystem::path> provider_config;  // live mode only
  vision::EnvLookup env = vision::process_env;
  guidance::CompilerOptions compiler;
  std::size_t parallelism = 4;
  // A component box counts as found at this IoU with the labelled box.
  double box_iou_threshold = 0.5;
  // An end position counts as right within this fraction of the image diagonal.
  double target_tolerance = 0.05;
};

struct StepReplay {
  StepOutcome outcome;
  std::optional<guidance::CompiledStep> compiled;
};

struct ReplayResult {
  std::string bundle_id;
  std::optional<plan::TaskPlan> plan;
  std::optional<std::string> plan_error;  // "<code>: <message>"
  std::vector<StepReplay> steps;
  std::vector<vision::LatencySample> samples;

  std::vector<StepOutcome> outcomes() const;
};

// Providers for one bundle: its mock fixture, or the configured live services.
using ProviderSource = std::function<vision::ProviderSetup(const FixtureBundle&)>;

// Resolves the providers of a mode up front, so a live run with missing keys
// or no config fails with Error(kConfigError) before any replay starts.
ProviderSource make_provider_source(const ReplayOptions& options);

// Plan request, field comparison against the labels, then one compile per
// step on that step's scene. Providers run in eval mode: one attempt, no
// corrective feedback.
ReplayResult replay(const FixtureBundle& bundle, const ReplayOptions& options);
ReplayResult replay(const FixtureBundle& bundle, const ReplayOptions& options, const ProviderSource& providers);
// Bundles in parallel; results in input order.
std::vector<ReplayResult> replay_all(const std::vector<FixtureBundle>& bundles, const ReplayOptions& options);

// The bundle driven through a session engine the way a client would: a query
// with the initial scene, then one advance per later step carrying that
// step's scene. Returns every message the engine sent.
std::vector<session::ProtocolMessage> run_session(const FixtureBundle& bundle, const ReplayOptions& options = {});
// Messages as a JSON array, without wall-clock timing.
nlohmann::json transcript_json(const std::vector<session::ProtocolMessage>& messages);
// Primitive kinds of each guidance_ready in order.
std::vector<std::vector<std::string>> transcript_kinds(const std::vector<session::ProtocolMessage>& messages);

// Category of a step's output, read from its first primitive:
// "highlight", "movement", "gesture", "tool" or "widget".
std::string guidance_category(const std::vector<std::string>& kinds);

}  // namespace guided::eval
