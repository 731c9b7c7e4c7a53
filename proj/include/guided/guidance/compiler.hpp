#pragma once

#include <memory>
#include <stop_token>
#include <string>

#include "guided/geometry/scene.hpp"
#include "guided/guidance/assets.hpp"
#include "guided/guidance/primitive.hpp"
#include "guided/plan/plan.hpp"
#include "guided/vision/gateway.hpp"

namespace guided::guidance {

struct CompilerOptions {
  double particle_threshold_m = 0.05;  // min edge strictly below -> particles
  double motion_duration_s = 2.0;
  double motion_pause_s = 0.5;
  double arc_sweep_deg = 180.0;
  bool allow_generated_tools = true;
};

struct CompileInput {
  std::size_t step_index = 0;
  geometry::SnapshotPtr snapshot;  // current frame; its pose anchors the step
  geometry::SnapshotPtr initial;   // axis-defining frame for rotation queries
  std::string tag;                 // latency sample tag
  std::stop_token stop;
};

// An Error raised while compiling one step, with the same code as its cause.
class StepCompileError : public Error {
 public:
  StepCompileError(const Error& cause, std::size_t step_index, std::string stage);
  std::size_t step_index() const noexcept { return step_index_; }
  const std::string& stage() const noexcept { return stage_; }  // "vision" or "geometry"

 private:
  std::size_t step_index_;
  std::string stage_;
};

// Turns a plan step and the snapshot taken for it into world-space guidance.
// Stateless between calls; safe to share across threads.
class GuidanceCompiler {
 public:
  explicit GuidanceCompiler(std::shared_ptr<vision::VisionGateway> gateway, const AssetLibrary* assets = nullptr,
                            CompilerOptions options = {}, GenerativeAssetHook generate = placeholder_asset_hook());

  CompiledStep compile_step(const plan::PlanStep& step, const CompileInput& input) const;
  // Validates first; an invalid document never reaches the gateway.
  CompiledStep compile_document(const plan::StepDocument& doc, const CompileInput& input) const;

  const CompilerOptions& options() const { return options_; }
  vision::VisionGateway& gateway() const { return *gateway_; }

 private:
  friend class CompileJob;
  std::shared_ptr<vision::VisionGateway> gateway_;
  const AssetLibrary* assets_;
  CompilerOptions options_;
  GenerativeAssetHook generate_;
};

// min edge < threshold.
bool uses_particles(double min_edge_m, double threshold_m = 0.05);

}  // namespace guided::guidance
