#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace guided {

// 8-bit interleaved pixels; channels is 1 (gray), 3 (RGB) or 4 (RGBA).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(int w, int h, int c, std::uint8_t fill = 0);

  bool empty() const { return data.empty(); }
  std::uint8_t* pixel(int x, int y) {
    return data.data() + (static_cast<std::size_t>(y) * width + x) * channels;
  }
  const std::uint8_t* pixel(int x, int y) const {
    return data.data() + (static_cast<std::size_t>(y) * width + x) * channels;
  }

  friend bool operator==(const Image&, const Image&) = default;
};

Image decode_png(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png(const Image& image);

// Copies the [x0, x0+w) x [y0, y0+h) window; throws on out-of-range windows.
Image crop(const Image& image, int x0, int y0, int w, int h);

}  // namespace guided
