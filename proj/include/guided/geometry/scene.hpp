#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "guided/geometry/camera.hpp"
#include "guided/geometry/depth.hpp"
#include "guided/image.hpp"

namespace guided::geometry {

// One captured moment: the anchor frame for a step's guidance.
struct SceneSnapshot {
  std::string id;
  Image image;
  DepthMap depth;
  CameraIntrinsics intrinsics;
  CameraPose pose;

  // Throws Error(kInvalidArgument) unless image, depth, intrinsics and pose
  // are present and mutually consistent.
  void validate() const;
};

using SnapshotPtr = std::shared_ptr<const SceneSnapshot>;

// Metadata document of a scene directory:
// {"image": "image.png", "depth": "depth.f32", "depth_width": W, "depth_height": H,
//  "intrinsics": {"fx","fy","cx","cy","width","height"},
//  "pose": {"rotation": [9 row-major], "translation": [3]}}
nlohmann::json intrinsics_to_json(const CameraIntrinsics& k);
CameraIntrinsics intrinsics_from_json(const nlohmann::json& j);
nlohmann::json pose_to_json(const CameraPose& pose);
CameraPose pose_from_json(const nlohmann::json& j);

SceneSnapshot load_scene(const std::filesystem::path& dir, std::string id = {});
void save_scene(const SceneSnapshot& scene, const std::filesystem::path& dir);

}  // namespace guided::geometry
