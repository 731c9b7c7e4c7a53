#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "guided/geometry/box.hpp"
#include "guided/image.hpp"

namespace guided::vision {

enum class Capability { kPlan, kBoundingBox, kTranslation, kRotation, kSegmentation };

std::string_view capability_name(Capability c);  // "plan", "bbox", ...
std::optional<Capability> parse_capability(std::string_view s);
inline constexpr Capability kAllCapabilities[] = {Capability::kPlan, Capability::kBoundingBox,
                                                  Capability::kTranslation, Capability::kRotation,
                                                  Capability::kSegmentation};

struct BoundingBoxResult {
  std::string name;
  geometry::BoundingBox2D box;             // pixels, clamped, non-zero area
  std::vector<std::string> warnings;
};

struct TranslationResult {
  std::string name;
  geometry::BoundingBox2D box;
  geometry::Point2 target;                 // pixels, inside the image
  std::vector<std::string> warnings;
};

enum class RotationAxis { kX, kY, kZ };
// Sense of rotation seen from the positive end of the axis.
enum class RotationDirection { kClockwise, kCounterclockwise };

std::string_view axis_name(RotationAxis a);               // "x"
std::string_view direction_name(RotationDirection d);     // "CW" / "CCW"

struct RotationResult {
  RotationAxis axis = RotationAxis::kX;
  RotationDirection direction = RotationDirection::kClockwise;
  friend bool operator==(const RotationResult&, const RotationResult&) = default;
};

// Row-major bitmask over the pixel rectangle of the queried box.
struct SegmentationMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // 0 or 1

  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  std::size_t count() const;
  double coverage() const;

  // Pixels with first channel > 127 are set.
  static SegmentationMask from_image(const Image& image);
  Image to_image() const;  // 8-bit gray, 0/255
};

}  // namespace guided::vision
