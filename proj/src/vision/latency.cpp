#include "guided/vision/latency.hpp"

namespace guided::vision {

std::string_view outcome_name(CallOutcome o) {
  switch (o) {
    case CallOutcome::kOk: return "ok";
    case CallOutcome::kTimeout: return "timeout";
    case CallOutcome::kRefused: return "refused";
    case CallOutcome::kFailed: return "failed";
    case CallOutcome::kCancelled: return "cancelled";
  }
  return "?";
}

void LatencyRecorder::record(LatencySample sample) {
  std::lock_guard lock(mu_);
  samples_.push_back(std::move(sample));
}

std::vector<LatencySample> LatencyRecorder::samples() const {
  std::lock_guard lock(mu_);
  return samples_;
}

std::vector<LatencySample> LatencyRecorder::samples_for(plan::VisualType type) const {
  std::lock_guard lock(mu_);
  std::vector<LatencySample> out;
  for (const auto& s : samples_) {
    if (s.visual_type == type) out.push_back(s);
  }
  return out;
}

std::size_t LatencyRecorder::size() const {
  std::lock_guard lock(mu_);
  return samples_.size();
}

void LatencyRecorder::clear() {
  std::lock_guard lock(mu_);
  samples_.clear();
}

}  // namespace guided::vision
