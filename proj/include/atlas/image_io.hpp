#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace atlas {

/// Interleaved 8- or 16-bit image. Samples are stored widened to 16 bits either way.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;   // 1 = gray, 3 = RGB
  int bit_depth = 8;  // 8 or 16
  std::vector<std::uint16_t> samples;

  static Image filled(int width, int height, int channels, int bit_depth, std::uint16_t value);

  bool empty() const { return width == 0 || height == 0 || samples.empty(); }
  bool all_zero() const;
  std::uint16_t at(int x, int y, int c = 0) const {
    return samples[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool operator==(const Image&) const = default;
};

/// Decodes gray or RGB PNGs at 8 or 16 bits. Throws IoError.
Image read_png(const std::filesystem::path& path);

/// Writes losslessly. Throws IoError.
void write_png(const std::filesystem::path& path, const Image& image);

}  // namespace atlas
