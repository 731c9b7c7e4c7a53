#include "guided/guidance/export.hpp"

#include <fmt/format.h>

#include "guided/codec.hpp"
#include "guided/error.hpp"
#include "guided/geometry/scene.hpp"
#include "guided/vision/reply.hpp"

namespace guided::guidance {

using nlohmann::json;

namespace {

constexpr std::string_view kFormat = "guided.scene/1";

json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw Error(ErrorCode::kParseError, "expected a 3-vector");
  return {v[0], v[1], v[2]};
}

json mat(const Mat3& m) {
  json r = json::array();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r.push_back(m(i, j));
  }
  return r;
}

Mat3 mat_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 9) throw Error(ErrorCode::kParseError, "expected 9 row-major values");
  Mat3 m;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) m(i, k) = v[static_cast<std::size_t>(3 * i + k)];
  }
  return m;
}

json asset_json(const AssetRef& a) {
  return {{"library_id", a.library_id}, {"mesh", a.mesh}, {"fallback_generated", a.fallback_generated}};
}

AssetRef asset_from(const json& j) {
  return {j.at("library_id").get<std::string>(), j.at("mesh").get<std::string>(),
          j.at("fallback_generated").get<bool>()};
}

json path_json(const MotionPath& p) {
  return {{"from", vec(p.from)}, {"to", vec(p.to)}, {"duration_s", p.duration_s}, {"pause_s", p.pause_s}};
}

struct PayloadToJson {
  json operator()(const Box3dPayload& p) const {
    json corners = json::array();
    for (const auto& c : p.corners) corners.push_back(vec(c));
    return {{"corners", corners}, {"min_edge", p.min_edge}};
  }
  json operator()(const ParticlePayload& p) const {
    return {{"center", vec(p.center)}, {"radius", p.radius}, {"min_edge", p.min_edge}};
  }
  json operator()(const ImagePlanePayload& p) const {
    return {{"crop_ref", p.crop_ref},         {"start", vec(p.start)},       {"end", vec(p.end)},
            {"plane_width", p.plane_width},   {"plane_height", p.plane_height}, {"duration_s", p.duration_s},
            {"pause_s", p.pause_s},           {"loop", p.loop}};
  }
  json operator()(const ArcArrowPayload& p) const {
    return {{"axis", vec(p.axis)},           {"direction", vision::direction_name(p.direction)},
            {"radius", p.radius},            {"sweep_deg", p.sweep_deg},
            {"center", vec(p.center)},       {"reference", vec(p.reference)}};
  }
  json operator()(const GesturePayload& p) const {
    return {{"asset", asset_json(p.asset)}, {"gesture", plan::gesture_name(p.gesture)}};
  }
  json operator()(const ToolPayload& p) const {
    return {{"asset", asset_json(p.asset)},
            {"tool_name", p.tool_name},
            {"motion", plan::tool_motion_name(p.motion)},
            {"surface_normal", vec(p.surface_normal)},
            {"path", p.path ? path_json(*p.path) : json(nullptr)}};
  }
  json operator()(const TimerPayload& p) const { return {{"seconds", p.seconds}}; }
};

Payload payload_from(PrimitiveKind kind, const json& j) {
  switch (kind) {
    case PrimitiveKind::kBox3d: {
      Box3dPayload p;
      const auto& corners = j.at("corners");
      if (corners.size() != 4) throw Error(ErrorCode::kParseError, "box3d needs 4 corners");
      for (std::size_t i = 0; i < 4; ++i) p.corners[i] = vec_from(corners[i]);
      p.min_edge = j.at("min_edge").get<double>();
      return p;
    }
    case PrimitiveKind::kParticleEmitter:
      return ParticlePayload{vec_from(j.at("center")), j.at("radius").get<double>(), j.at("min_edge").get<double>()};
    case PrimitiveKind::kImagePlaneAnimation: {
      ImagePlanePayload p;
      p.crop_ref = j.at("crop_ref").get<std::string>();
      p.start = vec_from(j.at("start"));
      p.end = vec_from(j.at("end"));
      p.plane_width = j.at("plane_width").get<double>();
      p.plane_height = j.at("plane_height").get<double>();
      p.duration_s = j.at("duration_s").get<double>();
      p.pause_s = j.at("pause_s").get<double>();
      p.loop = j.at("loop").get<bool>();
      return p;
    }
    case PrimitiveKind::kArcArrow: {
      ArcArrowPayload p;
      p.axis = vec_from(j.at("axis"));
      const auto dir = vision::parse_direction(j.at("direction").get<std::string>());
      if (!dir) throw Error(ErrorCode::kParseError, "arc_arrow has an unknown direction");
      p.direction = *dir;
      p.radius = j.at("radius").get<double>();
      p.sweep_deg = j.at("sweep_deg").get<double>();
      p.center = vec_from(j.at("center"));
      p.reference = vec_from(j.at("reference"));
      return p;
    }
    case PrimitiveKind::kGesturePlacement: {
      const auto g = plan::parse_gesture(j.at("gesture").get<std::string>());
      if (!g) throw Error(ErrorCode::kParseError, "gesture_placement has an unknown gesture");
      return GesturePayload{asset_from(j.at("asset")), *g};
    }
    case PrimitiveKind::kToolPlacement: {
      ToolPayload p;
      p.asset = asset_from(j.at("asset"));
      p.tool_name = j.at("tool_name").get<std::string>();
      const auto m = plan::parse_tool_motion(j.at("motion").get<std::string>());
      if (!m) throw Error(ErrorCode::kParseError, "tool_placement has an unknown motion");
      p.motion = *m;
      p.surface_normal = vec_from(j.at("surface_normal"));
      if (const auto& path = j.at("path"); !path.is_null()) {
        p.path = MotionPath{vec_from(path.at("from")), vec_from(path.at("to")), path.at("duration_s").get<double>(),
                            path.at("pause_s").get<double>()};
      }
      return p;
    }
    case PrimitiveKind::kTimerWidget:
      return TimerPayload{j.at("seconds").get<int>()};
  }
  throw Error(ErrorCode::kParseError, "unknown primitive kind");
}

json projected(const Point3& q, const geometry::CameraIntrinsics& k, const geometry::CameraPose& pose) {
  const auto px = geometry::project(q, k, pose);
  return px ? json::array({px->x(), px->y()}) : json(nullptr);
}

}  // namespace

std::vector<Point3> reference_points(const GuidancePrimitive& p) {
  struct Visitor {
    const GuidancePrimitive& prim;
    std::vector<Point3> operator()(const Box3dPayload& b) const {
      return {b.corners[0], b.corners[1], b.corners[2], b.corners[3]};
    }
    std::vector<Point3> operator()(const ParticlePayload& b) const { return {b.center}; }
    std::vector<Point3> operator()(const ImagePlanePayload& b) const { return {b.start, b.end}; }
    std::vector<Point3> operator()(const ArcArrowPayload& b) const { return b.polyline(); }
    std::vector<Point3> operator()(const GesturePayload&) const { return {prim.transform.position}; }
    std::vector<Point3> operator()(const ToolPayload& b) const {
      std::vector<Point3> pts{prim.transform.position};
      if (b.path) {
        pts.push_back(b.path->from);
        pts.push_back(b.path->to);
      }
      return pts;
    }
    std::vector<Point3> operator()(const TimerPayload&) const { return {prim.transform.position}; }
  };
  return std::visit(Visitor{p}, p.payload);
}

json export_scene_graph(const CompiledStep& step, const geometry::CameraIntrinsics& k, const ExportOptions& options) {
  json prims = json::array();
  for (const auto& p : step.primitives) {
    json points = json::array();
    for (const auto& q : reference_points(p)) points.push_back(projected(q, k, p.anchor_pose));
    prims.push_back({
        {"kind", kind_name(p.kind)},
        {"transform",
         {{"position", vec(p.transform.position)},
          {"orientation", mat(p.transform.orientation)},
          {"scale", vec(p.transform.scale)}}},
        {"payload", std::visit(PayloadToJson{}, p.payload)},
        {"anchor_pose", geometry::pose_to_json(p.anchor_pose)},
        {"reference", {{"anchor_px", projected(p.transform.position, k, p.anchor_pose)}, {"points_px", points}}},
    });
  }
  json doc{{"format", kFormat},
           {"step_index", step.step_index},
           {"visual_type", plan::visual_type_code(step.visual_type)},
           {"instruction", step.instruction},
           {"notes", step.notes},
           {"primitives", prims},
           {"crops", json::object()}};
  if (options.include_crops) {
    for (const auto& [ref, png] : step.crops) doc["crops"][ref] = codec::base64_encode(png);
  }
  if (options.include_timing) {
    doc["timing"] = {{"vision_s", step.timing.vision_s},
                     {"geometry_s", step.timing.geometry_s},
                     {"overlap_s", step.timing.overlap_s},
                     {"total_s", step.timing.total_s}};
  }
  return doc;
}

CompiledStep import_scene_graph(const json& doc) {
  try {
    if (doc.at("format") != kFormat) {
      throw Error(ErrorCode::kParseError, fmt::format("unsupported scene graph format {}", doc.at("format").dump()));
    }
    CompiledStep step;
    step.step_index = doc.at("step_index").get<std::size_t>();
    const auto type = plan::visual_type_from_code(doc.at("visual_type").get<long long>());
    if (!type) throw Error(ErrorCode::kParseError, "scene graph has an unknown visual_type");
    step.visual_type = *type;
    step.instruction = doc.at("instruction").get<std::string>();
    step.notes = doc.at("notes").get<std::vector<std::string>>();
    for (const auto& pj : doc.at("primitives")) {
      const auto kind = parse_kind(pj.at("kind").get<std::string>());
      if (!kind) throw Error(ErrorCode::kParseError, "unknown primitive kind " + pj.at("kind").dump());
      GuidancePrimitive p;
      p.kind = *kind;
      const auto& t = pj.at("transform");
      p.transform = {vec_from(t.at("position")), mat_from(t.at("orientation")), vec_from(t.at("scale"))};
      p.payload = payload_from(*kind, pj.at("payload"));
      p.anchor_pose = geometry::pose_from_json(pj.at("anchor_pose"));
      step.primitives.push_back(std::move(p));
    }
    for (const auto& [ref, b64] : doc.at("crops").items()) {
      step.crops.emplace(ref, codec::base64_decode(b64.get<std::string>()));
    }
    if (doc.contains("timing")) {
      const auto& t = doc.at("timing");
      step.timing = {t.at("vision_s").get<double>(), t.at("geometry_s").get<double>(),
                     t.at("overlap_s").get<double>(), t.at("total_s").get<double>()};
    }
    return step;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, fmt::format("scene graph: {}", e.what()));
  }
}

}  // namespace guided::guidance
