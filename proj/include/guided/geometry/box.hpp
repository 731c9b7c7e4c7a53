#pragma once

#include <array>
#include <string>

#include "guided/geometry/camera.hpp"

namespace guided::geometry {

// Provider boxes arrive as [y_min, x_min, y_max, x_max].
struct BoundingBox2D {
  double y_min = 0;
  double x_min = 0;
  double y_max = 0;
  double x_max = 0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  bool ordered() const { return y_min < y_max && x_min < x_max; }
  Point2 center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }
  Point2 bottom_left() const { return {x_min, y_max}; }
  Point2 bottom_right() const { return {x_max, y_max}; }
  Point2 top_left() const { return {x_min, y_min}; }
  Point2 top_right() const { return {x_max, y_min}; }
  Point2 top_center() const { return {0.5 * (x_min + x_max), y_min}; }
  Point2 bottom_center() const { return {0.5 * (x_min + x_max), y_max}; }
  Point2 mid_left() const { return {x_min, 0.5 * (y_min + y_max)}; }
  Point2 mid_right() const { return {x_max, 0.5 * (y_min + y_max)}; }

  BoundingBox2D clamped(int image_width, int image_height) const;
  std::array<double, 4> as_array() const { return {y_min, x_min, y_max, x_max}; }
  std::string to_string() const;

  friend bool operator==(const BoundingBox2D&, const BoundingBox2D&) = default;
};

// Intersection over union; 0 when either box is empty.
double iou(const BoundingBox2D& a, const BoundingBox2D& b);

// Integer pixel rectangle covering a box: [x0, x0+width) x [y0, y0+height).
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;
  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};
PixelRect pixel_rect(const BoundingBox2D& box, int image_width, int image_height);

// Boxes whose coordinates all lie in [0, 1000] on an image with a dimension
// larger than 1000 are read as 0-1000 normalized units and scaled to pixels.
bool looks_normalized(const BoundingBox2D& box, int image_width, int image_height);
BoundingBox2D denormalize(const BoundingBox2D& box, int image_width, int image_height);
Point2 denormalize(const Point2& p, int image_width, int image_height);

}  // namespace guided::geometry
