#include "guided/geometry/surface.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "guided/error.hpp"

namespace guided::geometry {

namespace {

const Vec3 kWorldUp{0.0, 1.0, 0.0};

// Right-handed frame with the given +z and an x axis perpendicular to `up`.
Mat3 frame_from_z_and_up(const Vec3& z, const Vec3& up) {
  const Vec3 x = up.cross(z).normalized();
  const Vec3 y = z.cross(x);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return r;
}

}  // namespace

Vec3 surface_normal(const Point3& bl, const Point3& br, const Point3& c, const Point3& camera_origin) {
  const Vec3 n = (br - bl).cross(c - bl);
  const double norm = n.norm();
  if (!(norm >= 1e-9)) {
    throw Error(ErrorCode::kDegenerateError, "surface points are collinear");
  }
  Vec3 unit = n / norm;
  if (unit.dot(camera_origin - c) < 0) unit = -unit;
  return unit;
}

double EdgeLengths::min() const { return std::min({bottom, top, left, right}); }
double EdgeLengths::max() const { return std::max({bottom, top, left, right}); }

Point3 locate(const Point2& p, const DepthMap& depth, const CameraIntrinsics& k, const CameraPose& pose) {
  return unproject(p, sample_depth(depth, p, k.width, k.height), k, pose);
}

WorldBox bbox_to_world_corners(const BoundingBox2D& box, const DepthMap& depth, const CameraIntrinsics& k,
                               const CameraPose& pose) {
  if (!box.ordered()) throw Error(ErrorCode::kInvalidArgument, "box corners out of order: " + box.to_string());
  WorldBox w;
  w.bl = locate(box.bottom_left(), depth, k, pose);
  w.br = locate(box.bottom_right(), depth, k, pose);
  w.tl = locate(box.top_left(), depth, k, pose);
  w.tr = locate(box.top_right(), depth, k, pose);
  w.edges.bottom = (w.br - w.bl).norm();
  w.edges.top = (w.tr - w.tl).norm();
  w.edges.left = (w.tl - w.bl).norm();
  w.edges.right = (w.tr - w.br).norm();
  return w;
}

Mat3 face_pose_orientation(const Point3& anchor, const CameraPose& saved_pose) {
  const Vec3 to_camera = saved_pose.origin() - anchor;
  if (!(to_camera.norm() > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "anchor coincides with the camera origin");
  }
  const Vec3 z = to_camera.normalized();
  static const double kParallel = std::cos(std::numbers::pi / 180.0);
  if (std::abs(z.dot(kWorldUp)) < kParallel) return frame_from_z_and_up(z, kWorldUp);

  // Looking straight up or down: the saved camera's own axes are
  // well-conditioned against the ray.
  const Vec3 camera_up = saved_pose.rotation.col(1);
  if (camera_up.cross(z).norm() > 1e-6) return frame_from_z_and_up(z, camera_up);
  return frame_from_z_and_up(z, saved_pose.rotation.col(0));
}

Mat3 initial_frame_axes(const CameraPose& initial_pose) {
  Vec3 right = initial_pose.rotation.col(0);
  right.y() = 0.0;
  if (right.norm() < 1e-9) {
    // Camera rolled onto its side; its -z still points into the scene.
    Vec3 toward_viewer = initial_pose.rotation.col(2);
    toward_viewer.y() = 0.0;
    right = kWorldUp.cross(toward_viewer);
  }
  right.normalize();
  Mat3 axes;
  axes.col(0) = right;
  axes.col(1) = kWorldUp;
  axes.col(2) = right.cross(kWorldUp);
  return axes;
}

Mat3 axis_angle(const Vec3& axis, double radians) {
  return Eigen::AngleAxisd(radians, axis.normalized()).toRotationMatrix();
}

}  // namespace guided::geometry
