#pragma once

#include <nlohmann/json.hpp>

#include "guided/geometry/camera.hpp"
#include "guided/guidance/primitive.hpp"

namespace guided::guidance {

struct ExportOptions {
  bool include_timing = true;  // off for byte-stable golden files
  bool include_crops = true;   // crop PNGs as base64 under "crops"
};

// Scene-graph document of one compiled step:
//   {"format": "guided.scene/1", "step_index", "visual_type", "instruction",
//    "notes", "primitives": [{"kind", "transform", "payload", "anchor_pose",
//      "reference": {"anchor_px": [u, v] | null, "points_px": [[u, v] | null, ...]}}],
//    "crops": {ref: base64}, "timing"?}
// Reference projections go through `k` and each primitive's anchor pose;
// points behind the camera are null.
nlohmann::json export_scene_graph(const CompiledStep& step, const geometry::CameraIntrinsics& k,
                                  const ExportOptions& options = {});

// Inverse of export_scene_graph; reference projections are dropped. Throws
// Error(kParseError) on malformed documents.
CompiledStep import_scene_graph(const nlohmann::json& doc);

// World points whose projections form the reference for `p`, in a fixed order:
// box corners bl, br, tr, tl; particle centre; plane start, end; arc polyline;
// gesture/tool position and tool path from, to; timer position.
std::vector<Point3> reference_points(const GuidancePrimitive& p);

}  // namespace guided::guidance
