#include "atlas/image_io.hpp"

#include <algorithm>
#include <csetjmp>
#include <cstdio>
#include <memory>

#include <fmt/format.h>
#include <png.h>

#include "atlas/errors.hpp"

namespace atlas {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports errors through longjmp; everything with a destructor lives
// outside the setjmp scopes below.

bool decode(std::FILE* fp, Image& out, std::vector<png_bytep>& rows, std::vector<png_byte>& buffer) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
    depth = 8;
  }
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // host little-endian samples
  png_read_update_info(png, info);

  const int channels = png_get_channels(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = buffer.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  out.width = static_cast<int>(width);
  out.height = static_cast<int>(height);
  out.channels = channels;
  out.bit_depth = depth == 16 ? 16 : 8;
  return true;
}

bool encode(std::FILE* fp, const Image& image, std::vector<png_bytep>& rows) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, fp);
  const int color = image.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height),
               image.bit_depth, color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  // No timestamps or text chunks: identical images give identical files.
  png_write_info(png, info);
  if (image.bit_depth == 16) png_set_swap(png);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

Image Image::filled(int width, int height, int channels, int bit_depth, std::uint16_t value) {
  Image img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  img.bit_depth = bit_depth;
  img.samples.assign(static_cast<std::size_t>(width) * height * channels, value);
  return img;
}

bool Image::all_zero() const {
  return std::all_of(samples.begin(), samples.end(), [](std::uint16_t s) { return s == 0; });
}

Image read_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError(fmt::format("cannot open image {}", path.string()));
  png_byte sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw IoError(fmt::format("{} is not a PNG file", path.string()));
  }
  std::rewind(fp.get());

  Image out;
  std::vector<png_bytep> rows;
  std::vector<png_byte> buffer;
  if (!decode(fp.get(), out, rows, buffer)) throw IoError(fmt::format("failed to decode PNG {}", path.string()));

  const std::size_t count = static_cast<std::size_t>(out.width) * out.height * out.channels;
  out.samples.resize(count);
  if (out.bit_depth == 16) {
    for (std::size_t i = 0; i < count; ++i) {
      out.samples[i] = static_cast<std::uint16_t>(buffer[2 * i] | (buffer[2 * i + 1] << 8));
    }
  } else {
    std::copy(buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(count), out.samples.begin());
  }
  return out;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw IoError(fmt::format("cannot write {}-channel image {}", image.channels, path.string()));
  }
  if (image.bit_depth != 8 && image.bit_depth != 16) {
    throw IoError(fmt::format("unsupported bit depth {} for {}", image.bit_depth, path.string()));
  }
  const std::size_t stride = static_cast<std::size_t>(image.width) * image.channels;
  const std::size_t bytes_per_sample = image.bit_depth == 16 ? 2 : 1;
  std::vector<png_byte> buffer(stride * image.height * bytes_per_sample);
  for (std::size_t i = 0; i < image.samples.size(); ++i) {
    if (bytes_per_sample == 2) {
      buffer[2 * i] = static_cast<png_byte>(image.samples[i] & 0xff);
      buffer[2 * i + 1] = static_cast<png_byte>(image.samples[i] >> 8);
    } else {
      buffer[i] = static_cast<png_byte>(image.samples[i]);
    }
  }
  std::vector<png_bytep> rows(image.height);
  for (int y = 0; y < image.height; ++y) rows[y] = buffer.data() + y * stride * bytes_per_sample;

  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError(fmt::format("cannot open {} for writing", path.string()));
  if (!encode(fp.get(), image, rows)) throw IoError(fmt::format("failed to encode PNG {}", path.string()));
  if (std::fflush(fp.get()) != 0) throw IoError(fmt::format("failed to flush {}", path.string()));
}

}  // namespace atlas
