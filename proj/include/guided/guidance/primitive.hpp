#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Geometry>

#include "guided/geometry/camera.hpp"
#include "guided/plan/plan.hpp"
#include "guided/vision/types.hpp"

namespace guided::guidance {

using geometry::Mat3;
using geometry::Point3;
using geometry::Vec3;

enum class PrimitiveKind {
  kBox3d,
  kParticleEmitter,
  kImagePlaneAnimation,
  kArcArrow,
  kGesturePlacement,
  kToolPlacement,
  kTimerWidget,
};

std::string_view kind_name(PrimitiveKind k);  // "box3d", "particle_emitter", ...
std::optional<PrimitiveKind> parse_kind(std::string_view s);

struct Transform {
  Point3 position = Point3::Zero();
  Mat3 orientation = Mat3::Identity();  // columns are the local axes in world
  Vec3 scale = Vec3::Ones();

  friend bool operator==(const Transform&, const Transform&) = default;
};

// Corners in bl, br, tr, tl order; rendered as a closed loop of edges.
struct Box3dPayload {
  std::array<Point3, 4> corners;
  double min_edge = 0;
  friend bool operator==(const Box3dPayload&, const Box3dPayload&) = default;
};

struct ParticlePayload {
  Point3 center = Point3::Zero();
  double radius = 0;
  double min_edge = 0;  // the edge that triggered the emitter
  friend bool operator==(const ParticlePayload&, const ParticlePayload&) = default;
};

// A cropped, blue-enhanced image on a plane moving start -> end. start == end
// is a static plane.
struct ImagePlanePayload {
  std::string crop_ref;  // sha256 of the RGBA PNG
  Point3 start = Point3::Zero();
  Point3 end = Point3::Zero();
  double plane_width = 0;
  double plane_height = 0;
  double duration_s = 2.0;
  double pause_s = 0.5;
  bool loop = true;

  bool is_static() const { return start == end; }
  // Linear; returns start and end exactly at the ends of the stroke.
  Point3 position_at(double t_seconds) const;
  friend bool operator==(const ImagePlanePayload&, const ImagePlanePayload&) = default;
};

struct ArcArrowPayload {
  Vec3 axis = Vec3::UnitZ();  // unit, world
  vision::RotationDirection direction = vision::RotationDirection::kClockwise;
  double radius = 0;
  double sweep_deg = 180;
  Point3 center = Point3::Zero();
  Vec3 reference = Vec3::UnitX();  // unit, perpendicular to axis; the arc is centred on it

  // segments + 1 points in travel order. CW and CCW are the same points in
  // reverse order.
  std::vector<Point3> polyline(int segments = 32) const;
  friend bool operator==(const ArcArrowPayload&, const ArcArrowPayload&) = default;
};

struct AssetRef {
  std::string library_id;  // "gesture/pinch", "tool/whisk", "generated/<name>"
  std::string mesh;        // path relative to the asset directory
  bool fallback_generated = false;
  friend bool operator==(const AssetRef&, const AssetRef&) = default;
};

struct GesturePayload {
  AssetRef asset;
  plan::GestureKind gesture = plan::GestureKind::kPoke;
  friend bool operator==(const GesturePayload&, const GesturePayload&) = default;
};

struct MotionPath {
  Point3 from = Point3::Zero();
  Point3 to = Point3::Zero();
  double duration_s = 2.0;
  double pause_s = 0.5;
  friend bool operator==(const MotionPath&, const MotionPath&) = default;
};

struct ToolPayload {
  AssetRef asset;
  std::string tool_name;
  plan::ToolMotion motion = plan::ToolMotion::kRotate;
  Vec3 surface_normal = Vec3::UnitY();
  std::optional<MotionPath> path;  // up_and_down / left_and_right
  friend bool operator==(const ToolPayload&, const ToolPayload&) = default;
};

struct TimerPayload {
  int seconds = 0;
  friend bool operator==(const TimerPayload&, const TimerPayload&) = default;
};

using Payload = std::variant<Box3dPayload, ParticlePayload, ImagePlanePayload, ArcArrowPayload, GesturePayload,
                             ToolPayload, TimerPayload>;

struct GuidancePrimitive {
  PrimitiveKind kind = PrimitiveKind::kBox3d;
  Transform transform;
  Payload payload;
  geometry::CameraPose anchor_pose;

  // Throws Error(kInvalidArgument) unless the orientation is a rotation, the
  // scale is positive and the payload matches the kind.
  void validate() const;
  friend bool operator==(const GuidancePrimitive&, const GuidancePrimitive&) = default;
};

struct StepTiming {
  double vision_s = 0;    // summed provider round trips
  double geometry_s = 0;  // depth sampling, unprojection, image work
  double overlap_s = 0;   // provider time that ran concurrently
  double total_s = 0;     // wall clock of the whole compile
  friend bool operator==(const StepTiming&, const StepTiming&) = default;
};

// Provider answers a step was compiled from.
struct Grounding {
  std::optional<geometry::BoundingBox2D> box;
  std::optional<geometry::Point2> target;
  std::optional<vision::RotationResult> rotation;
  std::optional<double> mask_coverage;
};

struct CompiledStep {
  std::size_t step_index = 0;
  plan::VisualType visual_type = plan::VisualType::kHighlight;
  std::string instruction;
  std::vector<GuidancePrimitive> primitives;
  StepTiming timing;
  std::map<std::string, std::vector<std::uint8_t>> crops;  // crop_ref -> PNG
  std::vector<std::string> notes;
  Grounding grounding;

  std::vector<PrimitiveKind> kinds() const;
};

// Kinds a visual type may produce.
bool kind_allowed(plan::VisualType type, PrimitiveKind kind);

}  // namespace guided::guidance
