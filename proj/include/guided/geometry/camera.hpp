#pragma once

#include <optional>

#include <Eigen/Core>

namespace guided::geometry {

// World frame: right-handed, x right and y up as seen from the initial frame,
// z toward the viewer. Cameras look along their local -z; pixel v grows down.
using Point2 = Eigen::Vector2d;  // (u, v) pixels
using Point3 = Eigen::Vector3d;  // meters
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kBehindCameraEpsilon = 1e-6;

struct CameraIntrinsics {
  double fx = 0;
  double fy = 0;
  double cx = 0;
  double cy = 0;
  int width = 0;
  int height = 0;

  // Throws Error(kInvalidArgument) when fx/fy are not positive or the
  // principal point lies outside the image.
  void validate() const;
  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

struct CameraPose {
  Mat3 rotation = Mat3::Identity();    // camera-to-world
  Vec3 translation = Vec3::Zero();     // camera origin in world

  static CameraPose identity() { return {}; }
  // Throws unless rotation is orthonormal with det +1 (1e-9).
  void validate() const;

  const Vec3& origin() const { return translation; }
  Point3 to_world(const Point3& camera_point) const { return rotation * camera_point + translation; }
  Point3 to_camera(const Point3& world_point) const {
    return rotation.transpose() * (world_point - translation);
  }

  friend bool operator==(const CameraPose& a, const CameraPose& b) {
    return a.rotation == b.rotation && a.translation == b.translation;
  }
};

bool is_rotation(const Mat3& r, double tolerance = 1e-9);

// Back-projects pixel p at depth d (meters along the optical axis).
Point3 unproject(const Point2& p, double depth, const CameraIntrinsics& k, const CameraPose& pose);

// nullopt when the point is at or behind the camera plane.
std::optional<Point2> project(const Point3& q, const CameraIntrinsics& k, const CameraPose& pose);

}  // namespace guided::geometry
