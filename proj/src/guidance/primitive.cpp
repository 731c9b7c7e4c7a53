#include "guided/guidance/primitive.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "guided/error.hpp"

namespace guided::guidance {

namespace {

constexpr std::pair<PrimitiveKind, std::string_view> kKindNames[] = {
    {PrimitiveKind::kBox3d, "box3d"},
    {PrimitiveKind::kParticleEmitter, "particle_emitter"},
    {PrimitiveKind::kImagePlaneAnimation, "image_plane_animation"},
    {PrimitiveKind::kArcArrow, "arc_arrow"},
    {PrimitiveKind::kGesturePlacement, "gesture_placement"},
    {PrimitiveKind::kToolPlacement, "tool_placement"},
    {PrimitiveKind::kTimerWidget, "timer_widget"},
};

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); }

}  // namespace

std::string_view kind_name(PrimitiveKind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  return "?";
}

std::optional<PrimitiveKind> parse_kind(std::string_view s) {
  for (const auto& [kind, name] : kKindNames) {
    if (name == s) return kind;
  }
  return std::nullopt;
}

Point3 ImagePlanePayload::position_at(double t_seconds) const {
  double t = std::max(0.0, t_seconds);
  if (loop) t = std::fmod(t, duration_s + pause_s);
  const double u = std::min(1.0, t / duration_s);
  if (u <= 0.0) return start;
  if (u >= 1.0) return end;
  return (1.0 - u) * start + u * end;
}

std::vector<Point3> ArcArrowPayload::polyline(int segments) const {
  const Vec3 v = axis.cross(reference);
  const double sweep = sweep_deg * std::numbers::pi / 180.0;
  std::vector<Point3> pts;
  pts.reserve(static_cast<std::size_t>(segments) + 1);
  for (int i = 0; i <= segments; ++i) {
    const double theta = -0.5 * sweep + sweep * i / segments;
    pts.push_back(center + radius * (std::cos(theta) * reference + std::sin(theta) * v));
  }
  // Increasing theta turns counterclockwise seen from the positive axis.
  if (direction == vision::RotationDirection::kClockwise) std::reverse(pts.begin(), pts.end());
  return pts;
}

void GuidancePrimitive::validate() const {
  if (!geometry::is_rotation(transform.orientation, 1e-9)) {
    invalid(fmt::format("{} orientation is not a rotation", kind_name(kind)));
  }
  if (!(transform.scale.array() > 0).all()) invalid(fmt::format("{} scale must be positive", kind_name(kind)));
  if (static_cast<std::size_t>(kind) != payload.index()) {
    invalid(fmt::format("{} carries a mismatched payload", kind_name(kind)));
  }
  if (const auto* plane = std::get_if<ImagePlanePayload>(&payload)) {
    if (!(plane->plane_width > 0 && plane->plane_height > 0)) invalid("image plane needs positive size");
    if (!(plane->duration_s > 0)) invalid("image plane needs a positive duration");
  }
  if (const auto* arc = std::get_if<ArcArrowPayload>(&payload)) {
    if (std::abs(arc->axis.norm() - 1.0) > 1e-9) invalid("arc axis must be a unit vector");
    if (!(arc->radius > 0)) invalid("arc radius must be positive");
    if (!(arc->sweep_deg > 0 && arc->sweep_deg <= 360)) invalid("arc sweep must be in (0, 360]");
  }
  if (const auto* timer = std::get_if<TimerPayload>(&payload)) {
    if (timer->seconds < 0) invalid("timer seconds must be non-negative");
  }
}

std::vector<PrimitiveKind> CompiledStep::kinds() const {
  std::vector<PrimitiveKind> out;
  for (const auto& p : primitives) out.push_back(p.kind);
  return out;
}

bool kind_allowed(plan::VisualType type, PrimitiveKind kind) {
  using plan::VisualType;
  switch (type) {
    case VisualType::kHighlight:
      return kind == PrimitiveKind::kBox3d || kind == PrimitiveKind::kParticleEmitter;
    case VisualType::kMovement:
      return kind == PrimitiveKind::kImagePlaneAnimation || kind == PrimitiveKind::kArcArrow;
    case VisualType::kHandGesture:
      return kind == PrimitiveKind::kGesturePlacement;
    case VisualType::kTool:
      return kind == PrimitiveKind::kToolPlacement || kind == PrimitiveKind::kArcArrow;
    case VisualType::kWidget:
      return kind == PrimitiveKind::kTimerWidget;
  }
  return false;
}

}  // namespace guided::guidance
