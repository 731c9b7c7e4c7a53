#include "guided/geometry/camera.hpp"

#include <cmath>

#include <Eigen/LU>
#include <fmt/format.h>

#include "guided/error.hpp"

namespace guided::geometry {

void CameraIntrinsics::validate() const {
  if (!(fx > 0) || !(fy > 0)) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("focal lengths must be positive ({}, {})", fx, fy));
  }
  if (!(cx >= 0 && cx < width && cy >= 0 && cy < height)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("principal point ({}, {}) outside {}x{} image", cx, cy, width, height));
  }
}

bool is_rotation(const Mat3& r, double tolerance) {
  if (!r.allFinite()) return false;
  const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tolerance && std::abs(r.determinant() - 1.0) <= tolerance;
}

void CameraPose::validate() const {
  if (!is_rotation(rotation)) {
    throw Error(ErrorCode::kInvalidArgument, "camera pose rotation is not orthonormal with det +1");
  }
  if (!translation.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "camera pose translation is not finite");
  }
}

Point3 unproject(const Point2& p, double depth, const CameraIntrinsics& k, const CameraPose& pose) {
  if (!(depth > 0)) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("unproject needs positive depth, got {}", depth));
  }
  const Point3 camera{(p.x() - k.cx) * depth / k.fx, -(p.y() - k.cy) * depth / k.fy, -depth};
  return pose.to_world(camera);
}

std::optional<Point2> project(const Point3& q, const CameraIntrinsics& k, const CameraPose& pose) {
  const Point3 c = pose.to_camera(q);
  if (c.z() >= -kBehindCameraEpsilon) return std::nullopt;
  const double depth = -c.z();
  return Point2{k.cx + k.fx * c.x() / depth, k.cy - k.fy * c.y() / depth};
}

}  // namespace guided::geometry
