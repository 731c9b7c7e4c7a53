#include "guided/geometry/box.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace guided::geometry {

BoundingBox2D BoundingBox2D::clamped(int image_width, int image_height) const {
  const double w = image_width;
  const double h = image_height;
  return {std::clamp(y_min, 0.0, h), std::clamp(x_min, 0.0, w), std::clamp(y_max, 0.0, h),
          std::clamp(x_max, 0.0, w)};
}

std::string BoundingBox2D::to_string() const {
  return fmt::format("[{}, {}, {}, {}]", y_min, x_min, y_max, x_max);
}

double iou(const BoundingBox2D& a, const BoundingBox2D& b) {
  if (!a.ordered() || !b.ordered()) return 0.0;
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= 0 || h <= 0) return 0.0;
  const double inter = w * h;
  return inter / (a.width() * a.height() + b.width() * b.height() - inter);
}

PixelRect pixel_rect(const BoundingBox2D& box, int image_width, int image_height) {
  const int x0 = std::clamp(static_cast<int>(std::floor(box.x_min)), 0, image_width);
  const int y0 = std::clamp(static_cast<int>(std::floor(box.y_min)), 0, image_height);
  const int x1 = std::clamp(static_cast<int>(std::ceil(box.x_max)), 0, image_width);
  const int y1 = std::clamp(static_cast<int>(std::ceil(box.y_max)), 0, image_height);
  return {x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

bool looks_normalized(const BoundingBox2D& box, int image_width, int image_height) {
  const double max_coord = std::max({box.y_min, box.x_min, box.y_max, box.x_max});
  const double min_coord = std::min({box.y_min, box.x_min, box.y_max, box.x_max});
  return min_coord >= 0 && max_coord <= 1000.0 && std::max(image_width, image_height) > 1000;
}

BoundingBox2D denormalize(const BoundingBox2D& box, int image_width, int image_height) {
  const double sx = image_width / 1000.0;
  const double sy = image_height / 1000.0;
  return {box.y_min * sy, box.x_min * sx, box.y_max * sy, box.x_max * sx};
}

Point2 denormalize(const Point2& p, int image_width, int image_height) {
  return {p.x() * image_width / 1000.0, p.y() * image_height / 1000.0};
}

}  // namespace guided::geometry
