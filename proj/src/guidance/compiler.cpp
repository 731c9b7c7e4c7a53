#include "guided/guidance/compiler.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <future>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "guided/codec.hpp"
#include "guided/geometry/surface.hpp"
#include "guided/guidance/imaging.hpp"

namespace guided::guidance {

using geometry::BoundingBox2D;
using geometry::Point2;
using plan::PlanStep;
using Clock = std::chrono::steady_clock;

namespace {

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// Any unit vector perpendicular to n.
Vec3 any_perpendicular(const Vec3& n) {
  const Vec3 trial = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return (trial - trial.dot(n) * n).normalized();
}

// Component of v orthogonal to unit n, normalized; nullopt when v is (almost) parallel.
std::optional<Vec3> in_plane(const Vec3& v, const Vec3& n) {
  const Vec3 p = v - v.dot(n) * n;
  if (p.norm() < 1e-6) return std::nullopt;
  return p.normalized();
}

}  // namespace

StepCompileError::StepCompileError(const Error& cause, std::size_t step_index, std::string stage)
    : Error(cause.code(), fmt::format("step {} ({}): {}", step_index, stage, cause.what())),
      step_index_(step_index),
      stage_(std::move(stage)) {}

bool uses_particles(double min_edge_m, double threshold_m) { return min_edge_m < threshold_m; }

// State of one compile: timing, output, and stage-tagged error translation.
class CompileJob {
 public:
  CompileJob(const GuidanceCompiler& c, const PlanStep& step, const CompileInput& in)
      : c_(c), step_(step), in_(in), snap_(*in.snapshot) {
    out_.step_index = in.step_index;
    out_.visual_type = step.visual_type();
    out_.instruction = step.instruction();
    ctx_.visual_type = step.visual_type();
    ctx_.tag = in.tag;
    ctx_.stop = in.stop;
  }

  CompiledStep run() {
    const auto start = Clock::now();
    switch (step_.visual_type()) {
      case plan::VisualType::kHighlight: highlight(); break;
      case plan::VisualType::kMovement:
        if (step_.movement() == plan::MovementKind::kRotation) rotation();
        else translation();
        break;
      case plan::VisualType::kHandGesture: gesture(); break;
      case plan::VisualType::kTool: tool(); break;
      case plan::VisualType::kWidget: widget(); break;
    }
    out_.timing.total_s = since(start);
    for (const auto& p : out_.primitives) p.validate();
    return std::move(out_);
  }

 private:
  template <typename F>
  auto vision(F&& f) {
    const auto t = Clock::now();
    try {
      auto r = f();
      out_.timing.vision_s += since(t);
      return r;
    } catch (const Error& e) {
      throw StepCompileError(e, in_.step_index, "vision");
    }
  }

  template <typename F>
  auto geometry(F&& f) {
    const auto t = Clock::now();
    try {
      auto r = f();
      out_.timing.geometry_s += since(t);
      return r;
    } catch (const Error& e) {
      throw StepCompileError(e, in_.step_index, "geometry");
    }
  }

  vision::FrameRef frame() const { return {snap_.id, &snap_.image}; }
  const geometry::CameraPose& pose() const { return snap_.pose; }

  Point3 locate(const Point2& p) const { return geometry::locate(p, snap_.depth, snap_.intrinsics, snap_.pose); }

  GuidancePrimitive primitive(PrimitiveKind kind, Transform t, Payload payload) const {
    return {kind, std::move(t), std::move(payload), pose()};
  }

  void note(std::string text) {
    spdlog::info("step {}: {}", in_.step_index, text);
    out_.notes.push_back(std::move(text));
  }

  void note_all(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) note(w);
  }

  BoundingBox2D fetch_box() {
    auto r = vision([&] { return c_.gateway_->request_bounding_box(frame(), step_.target(), ctx_); });
    note_all(r.warnings);
    out_.grounding.box = r.box;
    return r.box;
  }

  // In-plane frame of a world box: x along the bottom edge, z the normal.
  Mat3 box_frame(const geometry::WorldBox& wb) const {
    const Vec3 n = geometry::surface_normal(wb.bl, wb.br, wb.center(), pose().origin());
    const Vec3 x = in_plane(wb.br - wb.bl, n).value_or(any_perpendicular(n));
    Mat3 r;
    r.col(0) = x;
    r.col(1) = n.cross(x);
    r.col(2) = n;
    return r;
  }

  // Blue-enhanced crop of `box`, stored in the output; returns its ref.
  std::string store_crop(const BoundingBox2D& box, const vision::SegmentationMask& mask) {
    const auto rect = geometry::pixel_rect(box, snap_.image.width, snap_.image.height);
    const Image enhanced = enhance_blue(crop(snap_.image, rect.x0, rect.y0, rect.width, rect.height), mask);
    auto png = encode_png(enhanced);
    std::string ref = codec::sha256_hex(png);
    out_.crops.emplace(ref, std::move(png));
    return ref;
  }

  void highlight() {
    const BoundingBox2D box = fetch_box();
    geometry([&] {
      const auto wb = geometry::bbox_to_world_corners(box, snap_.depth, snap_.intrinsics, pose());
      const double min_edge = wb.edges.min();
      if (uses_particles(min_edge, c_.options_.particle_threshold_m)) {
        const Point3 center = wb.center();
        Transform t{center, geometry::face_pose_orientation(center, pose()), Vec3::Ones()};
        out_.primitives.push_back(
            primitive(PrimitiveKind::kParticleEmitter, t, ParticlePayload{center, 0.5 * wb.edges.max(), min_edge}));
      } else {
        Transform t{wb.center(), box_frame(wb), Vec3(wb.edges.bottom, wb.edges.left, 1.0)};
        out_.primitives.push_back(
            primitive(PrimitiveKind::kBox3d, t, Box3dPayload{{wb.bl, wb.br, wb.tr, wb.tl}, min_edge}));
      }
      return 0;
    });
  }

  void translation() {
    const auto tr = vision([&] {
      return c_.gateway_->request_translation_target(frame(), step_.target(), step_.instruction(), ctx_);
    });
    note_all(tr.warnings);
    out_.grounding.box = tr.box;
    out_.grounding.target = tr.target;
    const auto mask = vision([&] { return c_.gateway_->request_segmentation(frame(), tr.box, ctx_); });
    out_.grounding.mask_coverage = mask.coverage();
    geometry([&] {
      ImagePlanePayload plane;
      plane.crop_ref = store_crop(tr.box, mask);
      const auto& k = snap_.intrinsics;
      const double d_start = geometry::sample_depth(snap_.depth, tr.box.center(), k.width, k.height);
      double d_end = d_start;
      try {
        d_end = geometry::sample_depth(snap_.depth, tr.target, k.width, k.height);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kHoleError) throw;
        note(fmt::format("no depth at target ({}, {}); reusing start depth", tr.target.x(), tr.target.y()));
      }
      plane.start = geometry::unproject(tr.box.center(), d_start, k, pose());
      plane.end = geometry::unproject(tr.target, d_end, k, pose());
      std::tie(plane.plane_width, plane.plane_height) = image_plane_scale(tr.box, d_start, k);
      plane.duration_s = c_.options_.motion_duration_s;
      plane.pause_s = c_.options_.motion_pause_s;
      plane.loop = true;
      Transform t{plane.start, geometry::face_pose_orientation(plane.start, pose()),
                  Vec3(plane.plane_width, plane.plane_height, 1.0)};
      out_.primitives.push_back(primitive(PrimitiveKind::kImagePlaneAnimation, t, plane));
      return 0;
    });
  }

  void rotation() {
    const geometry::SceneSnapshot& initial = in_.initial ? *in_.initial : snap_;
    if (!in_.initial) note("no initial frame; the current frame defines the rotation axes");
    const vision::FrameRef initial_ref{initial.id, &initial.image};

    // The box and rotation queries are independent and run side by side.
    const auto wall = Clock::now();
    auto rotation_call = std::async(std::launch::async, [&] {
      const auto t = Clock::now();
      auto r = c_.gateway_->request_rotation_info(initial_ref, frame(), step_.target(), step_.instruction(), ctx_);
      return std::make_pair(r, since(t));
    });
    std::optional<vision::BoundingBoxResult> box_result;
    std::exception_ptr box_error;
    const auto box_start = Clock::now();
    try {
      box_result = c_.gateway_->request_bounding_box(frame(), step_.target(), ctx_);
    } catch (...) {
      box_error = std::current_exception();
    }
    const double box_s = since(box_start);
    std::pair<vision::RotationResult, double> rot;
    try {
      rot = rotation_call.get();
      if (box_error) std::rethrow_exception(box_error);
    } catch (const Error& e) {
      throw StepCompileError(e, in_.step_index, "vision");
    }
    const double wall_s = since(wall);
    out_.timing.vision_s += box_s + rot.second;
    out_.timing.overlap_s += std::max(0.0, box_s + rot.second - wall_s);
    note_all(box_result->warnings);
    const BoundingBox2D box = box_result->box;
    out_.grounding.box = box;
    out_.grounding.rotation = rot.first;

    const auto mask = vision([&] { return c_.gateway_->request_segmentation(frame(), box, ctx_); });
    out_.grounding.mask_coverage = mask.coverage();
    geometry([&] {
      const auto& k = snap_.intrinsics;
      const auto wb = geometry::bbox_to_world_corners(box, snap_.depth, k, pose());
      const Point3 center = wb.center();

      ImagePlanePayload plane;
      plane.crop_ref = store_crop(box, mask);
      const double d = geometry::sample_depth(snap_.depth, box.center(), k.width, k.height);
      std::tie(plane.plane_width, plane.plane_height) = image_plane_scale(box, d, k);
      plane.start = plane.end = center;
      plane.duration_s = c_.options_.motion_duration_s;
      plane.pause_s = c_.options_.motion_pause_s;
      Transform plane_t{center, geometry::face_pose_orientation(center, pose()),
                        Vec3(plane.plane_width, plane.plane_height, 1.0)};
      out_.primitives.push_back(primitive(PrimitiveKind::kImagePlaneAnimation, plane_t, plane));

      const Mat3 axes = geometry::initial_frame_axes(initial.pose);
      ArcArrowPayload arc;
      arc.axis = axes.col(static_cast<int>(rot.first.axis));
      arc.direction = rot.first.direction;
      arc.radius = 0.5 * wb.edges.max();
      arc.sweep_deg = c_.options_.arc_sweep_deg;
      arc.center = center;
      arc.reference = in_plane(pose().origin() - center, arc.axis).value_or(any_perpendicular(arc.axis));
      Mat3 r;
      r.col(0) = arc.reference;
      r.col(1) = arc.axis.cross(arc.reference);
      r.col(2) = arc.axis;
      out_.primitives.push_back(primitive(PrimitiveKind::kArcArrow, Transform{center, r, Vec3::Ones()}, arc));
      return 0;
    });
  }

  void gesture() {
    const auto kind = *step_.gesture();
    const auto asset = c_.assets_->find(gesture_asset_id(kind));
    if (!asset) {
      throw Error(ErrorCode::kUnknownAsset, fmt::format("asset manifest has no {}", gesture_asset_id(kind)));
    }
    const BoundingBox2D box = fetch_box();
    geometry([&] {
      const Point3 p = locate(box.center());
      Transform t{p, geometry::face_pose_orientation(p, pose()), Vec3::Ones()};
      out_.primitives.push_back(primitive(PrimitiveKind::kGesturePlacement, t, GesturePayload{*asset, kind}));
      return 0;
    });
  }

  AssetRef tool_asset(const std::string& name) {
    if (auto found = c_.assets_->find(tool_asset_id(name))) return *found;
    if (c_.options_.allow_generated_tools && c_.generate_) {
      if (auto generated = c_.generate_(name)) {
        note(fmt::format("tool '{}' not in the asset library; using generated asset {}", name, generated->library_id));
        return *generated;
      }
    }
    throw Error(ErrorCode::kUnknownAsset, fmt::format("asset manifest has no {}", tool_asset_id(name)));
  }

  void tool() {
    const auto use = *step_.tool_use();
    const AssetRef asset = tool_asset(use.tool);
    const BoundingBox2D box = fetch_box();
    geometry([&] {
      const auto wb = geometry::bbox_to_world_corners(box, snap_.depth, snap_.intrinsics, pose());
      const Point3 c = locate(box.center());
      const Vec3 n = geometry::surface_normal(wb.bl, wb.br, c, pose().origin());
      auto forward = in_plane(locate(box.bottom_center()) - c, n);
      if (!forward) {
        note("bottom-centre projects onto the tool centre; facing the camera instead");
        forward = in_plane(pose().origin() - c, n);
      }
      const Vec3 z = forward.value_or(any_perpendicular(n));
      Mat3 r_tool;
      r_tool.col(0) = n.cross(z);
      r_tool.col(1) = n;
      r_tool.col(2) = z;

      ToolPayload payload{asset, use.tool, use.motion, n, std::nullopt};
      const auto path = [&](const Point2& a, const Point2& b) {
        return MotionPath{locate(a), locate(b), c_.options_.motion_duration_s, c_.options_.motion_pause_s};
      };
      if (use.motion == plan::ToolMotion::kUpAndDown) payload.path = path(box.top_center(), box.bottom_center());
      if (use.motion == plan::ToolMotion::kLeftAndRight) payload.path = path(box.mid_left(), box.mid_right());
      out_.primitives.push_back(primitive(PrimitiveKind::kToolPlacement, Transform{c, r_tool, Vec3::Ones()}, payload));

      if (!payload.path) {
        // rotate and clockwise turn the tool frame +90 deg about its local x,
        // counterclockwise -90 deg; the arc runs counterclockwise about the
        // turned frame's z, which is -n or +n respectively.
        const bool ccw = use.motion == plan::ToolMotion::kCounterclockwise;
        const Mat3 r_arc = r_tool * geometry::axis_angle(Vec3::UnitX(), (ccw ? -0.5 : 0.5) * std::numbers::pi);
        ArcArrowPayload arc;
        arc.axis = n;
        arc.direction = ccw ? vision::RotationDirection::kCounterclockwise : vision::RotationDirection::kClockwise;
        arc.radius = 0.5 * wb.edges.max();
        arc.sweep_deg = c_.options_.arc_sweep_deg;
        arc.center = c;
        arc.reference = z;
        out_.primitives.push_back(primitive(PrimitiveKind::kArcArrow, Transform{c, r_arc, Vec3::Ones()}, arc));
      }
      return 0;
    });
  }

  void widget() {
    const BoundingBox2D box = fetch_box();
    geometry([&] {
      const Point3 p = locate(box.top_center());
      Transform t{p, geometry::face_pose_orientation(p, pose()), Vec3::Ones()};
      out_.primitives.push_back(primitive(PrimitiveKind::kTimerWidget, t, TimerPayload{*step_.wait_seconds()}));
      return 0;
    });
  }

  const GuidanceCompiler& c_;
  const PlanStep& step_;
  const CompileInput& in_;
  const geometry::SceneSnapshot& snap_;
  vision::CallContext ctx_;
  CompiledStep out_;
};

GuidanceCompiler::GuidanceCompiler(std::shared_ptr<vision::VisionGateway> gateway, const AssetLibrary* assets,
                                   CompilerOptions options, GenerativeAssetHook generate)
    : gateway_(std::move(gateway)),
      assets_(assets != nullptr ? assets : &AssetLibrary::shipped()),
      options_(options),
      generate_(std::move(generate)) {
  if (!gateway_) throw Error(ErrorCode::kConfigError, "guidance compiler needs a vision gateway");
}

CompiledStep GuidanceCompiler::compile_step(const PlanStep& step, const CompileInput& input) const {
  if (!input.snapshot) throw Error(ErrorCode::kInvalidArgument, "compile_step needs a snapshot");
  input.snapshot->validate();
  return CompileJob(*this, step, input).run();
}

CompiledStep GuidanceCompiler::compile_document(const plan::StepDocument& doc, const CompileInput& input) const {
  return compile_step(PlanStep::from_document(doc), input);
}

}  // namespace guided::guidance
