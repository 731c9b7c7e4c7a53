#include "guided/image.hpp"

#include <cstring>
#include <memory>

#include <fmt/format.h>
#include <png.h>

#include "guided/error.hpp"

namespace guided {

namespace {

struct PngImageGuard {
  png_image* image;
  ~PngImageGuard() { png_image_free(image); }
};

png_uint_32 format_for_channels(int channels) {
  switch (channels) {
    case 1: return PNG_FORMAT_GRAY;
    case 3: return PNG_FORMAT_RGB;
    case 4: return PNG_FORMAT_RGBA;
    default: throw Error(ErrorCode::kInvalidArgument, fmt::format("unsupported channel count {}", channels));
  }
}

}  // namespace

Image::Image(int w, int h, int c, std::uint8_t fill)
    : width(w), height(h), channels(c),
      data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c), fill) {}

Image decode_png(std::span<const std::uint8_t> bytes) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  PngImageGuard guard{&png};
  if (png_image_begin_read_from_memory(&png, bytes.data(), bytes.size()) == 0) {
    throw Error(ErrorCode::kParseError, fmt::format("invalid PNG: {}", png.message));
  }
  int channels = 3;
  if (png.format & PNG_FORMAT_FLAG_ALPHA) {
    channels = 4;
  } else if (!(png.format & PNG_FORMAT_FLAG_COLOR)) {
    channels = 1;
  }
  png.format = format_for_channels(channels);
  Image out(static_cast<int>(png.width), static_cast<int>(png.height), channels);
  if (png_image_finish_read(&png, nullptr, out.data.data(), 0, nullptr) == 0) {
    throw Error(ErrorCode::kParseError, fmt::format("PNG decode failed: {}", png.message));
  }
  return out;
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = format_for_channels(image.channels);
  PngImageGuard guard{&png};

  // One compression pass into a worst-case buffer, then trim.
  png_alloc_size_t size = PNG_IMAGE_PNG_SIZE_MAX(png);
  std::vector<std::uint8_t> out(size);
  if (png_image_write_to_memory(&png, out.data(), &size, 0, image.data.data(), 0, nullptr) == 0) {
    throw Error(ErrorCode::kIoError, fmt::format("PNG encode failed: {}", png.message));
  }
  out.resize(size);
  return out;
}

Image crop(const Image& image, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || w < 0 || h < 0 || x0 + w > image.width || y0 + h > image.height) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("crop {}x{}+{}+{} outside {}x{} image", w, h, x0, y0, image.width, image.height));
  }
  Image out(w, h, image.channels);
  const std::size_t row = static_cast<std::size_t>(w) * image.channels;
  for (int y = 0; y < h; ++y) {
    std::memcpy(out.pixel(0, y), image.pixel(x0, y0 + y), row);
  }
  return out;
}

}  // namespace guided
