#include "guided/guidance/imaging.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "guided/error.hpp"

namespace guided::guidance {

Image enhance_blue(const Image& crop, const vision::SegmentationMask& mask) {
  if (crop.width != mask.width || crop.height != mask.height) {
    throw Error(ErrorCode::kDimensionMismatch, fmt::format("crop {}x{} vs mask {}x{}", crop.width, crop.height,
                                                           mask.width, mask.height));
  }
  if (crop.channels != 3 && crop.channels != 4) {
    throw Error(ErrorCode::kInvalidArgument, "enhance_blue needs an RGB or RGBA crop");
  }
  Image out(crop.width, crop.height, 4);
  for (int y = 0; y < crop.height; ++y) {
    for (int x = 0; x < crop.width; ++x) {
      const std::uint8_t* src = crop.pixel(x, y);
      std::uint8_t* dst = out.pixel(x, y);
      dst[0] = src[0];
      dst[1] = src[1];
      if (mask.at(x, y)) {
        dst[2] = static_cast<std::uint8_t>(std::min(3 * static_cast<int>(src[2]), 255));
        dst[3] = 255;
      } else {
        dst[2] = src[2];
        dst[3] = 0;
      }
    }
  }
  return out;
}

std::pair<double, double> image_plane_scale(const geometry::BoundingBox2D& box, double depth,
                                            const geometry::CameraIntrinsics& k) {
  if (!(depth > 0)) throw Error(ErrorCode::kInvalidArgument, "plane depth must be positive");
  return {box.width() * depth / k.fx, box.height() * depth / k.fy};
}

}  // namespace guided::guidance
