#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "guided/geometry/camera.hpp"

namespace guided::geometry {

inline constexpr int kDefaultHoleRadius = 7;

// Row-major depth grid in meters. Zero, negative-zero and NaN mark holes.
class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int width, int height, std::vector<float> values);
  static DepthMap uniform(int width, int height, float meters);

  // Little-endian float32, row-major.
  static DepthMap from_bytes(int width, int height, std::span<const std::uint8_t> bytes);
  std::vector<std::uint8_t> to_bytes() const;

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return values_.empty(); }
  float at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  float& at(int x, int y) { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  bool is_hole(int x, int y) const;
  const std::vector<float>& values() const { return values_; }

  friend bool operator==(const DepthMap&, const DepthMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> values_;
};

// Depth at image pixel p of an image_width x image_height frame. The pixel is
// scaled into the depth grid and sampled at the nearest cell; holes fall back
// to the median of valid cells in a square window grown up to max_radius.
// Throws Error(kHoleError) when nothing valid is found.
double sample_depth(const DepthMap& depth, const Point2& p, int image_width, int image_height,
                    int max_radius = kDefaultHoleRadius);

}  // namespace guided::geometry
