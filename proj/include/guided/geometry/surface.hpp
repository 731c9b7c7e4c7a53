#pragma once

#include "guided/geometry/box.hpp"
#include "guided/geometry/camera.hpp"
#include "guided/geometry/depth.hpp"

namespace guided::geometry {

// Unit normal of the plane through bl, br, c, oriented toward camera_origin.
// Throws Error(kDegenerateError) for (near-)collinear points.
Vec3 surface_normal(const Point3& bl, const Point3& br, const Point3& c, const Point3& camera_origin);

struct EdgeLengths {
  double bottom = 0;
  double top = 0;
  double left = 0;
  double right = 0;

  double min() const;
  double max() const;
};

struct WorldBox {
  Point3 bl;
  Point3 br;
  Point3 tl;
  Point3 tr;
  EdgeLengths edges;

  Point3 center() const { return 0.25 * (bl + br + tl + tr); }
};

// Each corner is unprojected with its own sampled depth.
WorldBox bbox_to_world_corners(const BoundingBox2D& box, const DepthMap& depth, const CameraIntrinsics& k,
                               const CameraPose& pose);

// Depth-sampled unprojection of one image pixel.
Point3 locate(const Point2& p, const DepthMap& depth, const CameraIntrinsics& k, const CameraPose& pose);

// Billboard frame at `anchor`: +z toward the saved camera origin, +x
// horizontal, right-handed. When the view ray is within 1 degree of world
// up/down the camera's up vector replaces world up.
Mat3 face_pose_orientation(const Point3& anchor, const CameraPose& saved_pose);

// World axes named by the initial frame: x right in the photo (levelled),
// y physically up, z toward the viewer. Columns are x, y, z.
Mat3 initial_frame_axes(const CameraPose& initial_pose);

// Rotation about a unit axis by the given angle (radians).
Mat3 axis_angle(const Vec3& axis, double radians);

}  // namespace guided::geometry
