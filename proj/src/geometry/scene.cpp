#include "guided/geometry/scene.hpp"

#include <fmt/format.h>

#include "guided/error.hpp"
#include "guided/text.hpp"

namespace guided::geometry {

using nlohmann::json;

void SceneSnapshot::validate() const {
  if (image.empty()) throw Error(ErrorCode::kInvalidArgument, "snapshot has no image");
  if (depth.empty()) throw Error(ErrorCode::kInvalidArgument, "snapshot has no depth map");
  intrinsics.validate();
  pose.validate();
  if (image.width != intrinsics.width || image.height != intrinsics.height) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("image {}x{} does not match intrinsics {}x{}", image.width, image.height,
                            intrinsics.width, intrinsics.height));
  }
}

json intrinsics_to_json(const CameraIntrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

CameraIntrinsics intrinsics_from_json(const json& j) {
  try {
    CameraIntrinsics k;
    k.fx = j.at("fx").get<double>();
    k.fy = j.at("fy").get<double>();
    k.cx = j.at("cx").get<double>();
    k.cy = j.at("cy").get<double>();
    k.width = j.at("width").get<int>();
    k.height = j.at("height").get<int>();
    return k;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBundleFormat, fmt::format("intrinsics: {}", e.what()));
  }
}

json pose_to_json(const CameraPose& pose) {
  json r = json::array();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r.push_back(pose.rotation(i, j));
  }
  return {{"rotation", r}, {"translation", {pose.translation.x(), pose.translation.y(), pose.translation.z()}}};
}

CameraPose pose_from_json(const json& j) {
  try {
    const auto r = j.at("rotation").get<std::vector<double>>();
    const auto t = j.at("translation").get<std::vector<double>>();
    if (r.size() != 9 || t.size() != 3) {
      throw Error(ErrorCode::kBundleFormat, "pose needs 9 rotation and 3 translation values");
    }
    CameraPose pose;
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 3; ++k) pose.rotation(i, k) = r[static_cast<std::size_t>(3 * i + k)];
    }
    pose.translation = Vec3{t[0], t[1], t[2]};
    return pose;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBundleFormat, fmt::format("pose: {}", e.what()));
  }
}

SceneSnapshot load_scene(const std::filesystem::path& dir, std::string id) {
  const auto meta_path = dir / "meta.json";
  json meta = json::parse(text::read_file(meta_path.string()), nullptr, false);
  if (meta.is_discarded()) throw Error(ErrorCode::kBundleFormat, meta_path.string() + ": not JSON");

  SceneSnapshot scene;
  scene.id = id.empty() ? dir.filename().string() : std::move(id);
  try {
    scene.image = decode_png(text::read_binary_file((dir / meta.at("image").get<std::string>()).string()));
    const auto depth_bytes = text::read_binary_file((dir / meta.at("depth").get<std::string>()).string());
    scene.depth = DepthMap::from_bytes(meta.at("depth_width").get<int>(), meta.at("depth_height").get<int>(),
                                       depth_bytes);
    scene.intrinsics = intrinsics_from_json(meta.at("intrinsics"));
    scene.pose = pose_from_json(meta.at("pose"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBundleFormat, fmt::format("{}: {}", meta_path.string(), e.what()));
  }
  scene.validate();
  return scene;
}

void save_scene(const SceneSnapshot& scene, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto png = encode_png(scene.image);
  text::write_file((dir / "image.png").string(), {reinterpret_cast<const char*>(png.data()), png.size()});
  const auto depth = scene.depth.to_bytes();
  text::write_file((dir / "depth.f32").string(), {reinterpret_cast<const char*>(depth.data()), depth.size()});
  json meta{{"image", "image.png"},
            {"depth", "depth.f32"},
            {"depth_width", scene.depth.width()},
            {"depth_height", scene.depth.height()},
            {"intrinsics", intrinsics_to_json(scene.intrinsics)},
            {"pose", pose_to_json(scene.pose)}};
  text::write_file((dir / "meta.json").string(), meta.dump(2));
}

}  // namespace guided::geometry
