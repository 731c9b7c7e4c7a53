#pragma once

#include <utility>

#include "guided/geometry/box.hpp"
#include "guided/image.hpp"
#include "guided/vision/types.hpp"

namespace guided::guidance {

// RGBA result: masked pixels keep red/green, get blue*3 clamped to 255 and
// full alpha; unmasked pixels keep RGB with alpha 0. Accepts RGB or RGBA
// crops. Throws Error(kDimensionMismatch).
Image enhance_blue(const Image& crop, const vision::SegmentationMask& mask);

// Plane size in meters: box width * d / fx by box height * d / fy.
std::pair<double, double> image_plane_scale(const geometry::BoundingBox2D& box, double depth,
                                            const geometry::CameraIntrinsics& k);

}  // namespace guided::guidance
