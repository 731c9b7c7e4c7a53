#include "guided/geometry/depth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include <fmt/format.h>

#include "guided/error.hpp"

namespace guided::geometry {

static_assert(std::endian::native == std::endian::little, "depth files are little-endian float32");

DepthMap::DepthMap(int width, int height, std::vector<float> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width <= 0 || height <= 0 ||
      values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("depth map {}x{} does not match {} values", width, height, values_.size()));
  }
  for (float v : values_) {
    if (std::isfinite(v) && v < 0) throw Error(ErrorCode::kInvalidArgument, "negative depth value");
  }
}

DepthMap DepthMap::uniform(int width, int height, float meters) {
  return DepthMap(width, height, std::vector<float>(static_cast<std::size_t>(width) * height, meters));
}

DepthMap DepthMap::from_bytes(int width, int height, std::span<const std::uint8_t> bytes) {
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (width <= 0 || height <= 0 || bytes.size() != count * sizeof(float)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("depth payload of {} bytes does not match {}x{}", bytes.size(), width, height));
  }
  std::vector<float> values(count);
  std::memcpy(values.data(), bytes.data(), bytes.size());
  return DepthMap(width, height, std::move(values));
}

std::vector<std::uint8_t> DepthMap::to_bytes() const {
  std::vector<std::uint8_t> out(values_.size() * sizeof(float));
  std::memcpy(out.data(), values_.data(), out.size());
  return out;
}

bool DepthMap::is_hole(int x, int y) const {
  const float v = at(x, y);
  return !std::isfinite(v) || v <= 0.0F;
}

double sample_depth(const DepthMap& depth, const Point2& p, int image_width, int image_height,
                    int max_radius) {
  if (depth.empty()) throw Error(ErrorCode::kHoleError, "empty depth map");
  if (!(p.x() >= 0 && p.x() <= image_width && p.y() >= 0 && p.y() <= image_height)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("pixel ({}, {}) outside {}x{} image", p.x(), p.y(), image_width, image_height));
  }
  const double sx = static_cast<double>(depth.width()) / image_width;
  const double sy = static_cast<double>(depth.height()) / image_height;
  const int gx = std::clamp(static_cast<int>(std::floor(p.x() * sx)), 0, depth.width() - 1);
  const int gy = std::clamp(static_cast<int>(std::floor(p.y() * sy)), 0, depth.height() - 1);
  if (!depth.is_hole(gx, gy)) return depth.at(gx, gy);

  std::vector<float> window;
  for (int r = 1; r <= max_radius; ++r) {
    window.clear();
    for (int y = std::max(0, gy - r); y <= std::min(depth.height() - 1, gy + r); ++y) {
      for (int x = std::max(0, gx - r); x <= std::min(depth.width() - 1, gx + r); ++x) {
        if (!depth.is_hole(x, y)) window.push_back(depth.at(x, y));
      }
    }
    if (window.empty()) continue;
    const std::size_t mid = window.size() / 2;
    std::nth_element(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(mid), window.end());
    const double upper = window[mid];
    if (window.size() % 2 == 1) return upper;
    const double lower = *std::max_element(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
  }
  throw Error(ErrorCode::kHoleError,
              fmt::format("no valid depth within {} cells of ({}, {})", max_radius, gx, gy));
}

}  // namespace guided::geometry
