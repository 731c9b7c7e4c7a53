#include "guided/vision/types.hpp"

#include <algorithm>

#include "guided/error.hpp"

namespace guided::vision {

std::string_view capability_name(Capability c) {
  switch (c) {
    case Capability::kPlan: return "plan";
    case Capability::kBoundingBox: return "bbox";
    case Capability::kTranslation: return "translation";
    case Capability::kRotation: return "rotation";
    case Capability::kSegmentation: return "segmentation";
  }
  return "?";
}

std::optional<Capability> parse_capability(std::string_view s) {
  for (Capability c : kAllCapabilities) {
    if (capability_name(c) == s) return c;
  }
  return std::nullopt;
}

std::string_view axis_name(RotationAxis a) {
  switch (a) {
    case RotationAxis::kX: return "x";
    case RotationAxis::kY: return "y";
    case RotationAxis::kZ: return "z";
  }
  return "?";
}

std::string_view direction_name(RotationDirection d) {
  return d == RotationDirection::kClockwise ? "CW" : "CCW";
}

std::size_t SegmentationMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

double SegmentationMask::coverage() const {
  return bits.empty() ? 0.0 : static_cast<double>(count()) / static_cast<double>(bits.size());
}

SegmentationMask SegmentationMask::from_image(const Image& image) {
  if (image.empty()) throw Error(ErrorCode::kInvalidArgument, "mask image is empty");
  SegmentationMask m;
  m.width = image.width;
  m.height = image.height;
  m.bits.resize(static_cast<std::size_t>(image.width) * image.height);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      m.bits[static_cast<std::size_t>(y) * image.width + x] = image.pixel(x, y)[0] > 127 ? 1 : 0;
    }
  }
  return m;
}

Image SegmentationMask::to_image() const {
  Image img(width, height, 1);
  for (std::size_t i = 0; i < bits.size(); ++i) img.data[i] = bits[i] != 0 ? 255 : 0;
  return img;
}

}  // namespace guided::vision
