#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "guided/plan/plan.hpp"
#include "guided/vision/types.hpp"

namespace guided::vision {

enum class CallOutcome { kOk, kTimeout, kRefused, kFailed, kCancelled };
std::string_view outcome_name(CallOutcome o);

struct LatencySample {
  Capability capability = Capability::kPlan;
  std::optional<plan::VisualType> visual_type;
  std::string tag;          // caller-chosen, e.g. "bundle/step"
  int attempt = 0;
  double seconds = 0;
  CallOutcome outcome = CallOutcome::kOk;
};

class LatencyRecorder {
 public:
  void record(LatencySample sample);
  std::vector<LatencySample> samples() const;
  std::vector<LatencySample> samples_for(plan::VisualType type) const;
  std::size_t size() const;
  void clear();

 private:
  mutable std::mutex mu_;
  std::vector<LatencySample> samples_;
};

}  // namespace guided::vision
