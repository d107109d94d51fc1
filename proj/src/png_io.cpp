#include "isomer/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <vector>

namespace isomer {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

uint16_t quantize(double v, int bit_depth) {
  double maxval = bit_depth == 16 ? 65535.0 : 255.0;
  double s = std::lround((v < 0 ? 0 : (v > 1 ? 1 : v)) * maxval);
  return uint16_t(s);
}

}  // namespace

PngData read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("cannot open image: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("failed to decode image: " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int bit_depth = png_get_bit_depth(png, info);
  int color_type = png_get_color_type(png, info);

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (bit_depth == 16) png_set_swap(png);  // stored big-endian
  png_read_update_info(png, info);

  color_type = png_get_color_type(png, info);
  bit_depth = png_get_bit_depth(png, info);
  int channels = png_get_channels(png, info);

  size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<uint8_t> buffer(rowbytes * h);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = buffer.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  PngData out;
  out.bit_depth = bit_depth;
  out.rgb = Image<Vec3>(int(w), int(h));
  bool has_alpha = channels == 2 || channels == 4;
  if (has_alpha) out.alpha = Image<double>(int(w), int(h));
  int color_channels = channels - (has_alpha ? 1 : 0);
  double maxval = bit_depth == 16 ? 65535.0 : 255.0;

  for (png_uint_32 y = 0; y < h; ++y) {
    for (png_uint_32 x = 0; x < w; ++x) {
      double v[4] = {0, 0, 0, 0};
      for (int c = 0; c < channels; ++c) {
        size_t idx = (size_t(x) * channels + c);
        if (bit_depth == 16) {
          uint16_t raw;
          std::memcpy(&raw, rows[y] + idx * 2, 2);
          v[c] = raw / maxval;
        } else {
          v[c] = rows[y][idx] / maxval;
        }
      }
      Vec3 rgb = color_channels == 1 ? Vec3{v[0], v[0], v[0]} : Vec3{v[0], v[1], v[2]};
      out.rgb.at(int(x), int(y)) = rgb;
      if (has_alpha) out.alpha.at(int(x), int(y)) = v[color_channels];
    }
  }
  return out;
}

namespace {

void write_png(const std::string& path, int w, int h, int channels, int bit_depth,
               const std::vector<uint16_t>& samples) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("cannot write image: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("failed to encode image: " + path);
  }
  png_init_io(png, fp.get());
  int color_type = channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, w, h, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  size_t row_samples = size_t(w) * channels;
  if (bit_depth == 16) {
    std::vector<uint8_t> row(row_samples * 2);
    for (int y = 0; y < h; ++y) {
      for (size_t i = 0; i < row_samples; ++i) {
        uint16_t s = samples[size_t(y) * row_samples + i];
        row[2 * i] = uint8_t(s >> 8);  // big-endian per spec
        row[2 * i + 1] = uint8_t(s & 0xff);
      }
      png_write_row(png, row.data());
    }
  } else {
    std::vector<uint8_t> row(row_samples);
    for (int y = 0; y < h; ++y) {
      for (size_t i = 0; i < row_samples; ++i)
        row[i] = uint8_t(samples[size_t(y) * row_samples + i]);
      png_write_row(png, row.data());
    }
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_png_gray(const std::string& path, const Image<double>& img, int bit_depth) {
  std::vector<uint16_t> samples(img.pixel_count());
  for (size_t i = 0; i < img.pixel_count(); ++i) samples[i] = quantize(img.data[i], bit_depth);
  write_png(path, img.width, img.height, 1, bit_depth, samples);
}

void write_png_rgb(const std::string& path, const Image<Vec3>& img, int bit_depth) {
  std::vector<uint16_t> samples(img.pixel_count() * 3);
  for (size_t i = 0; i < img.pixel_count(); ++i) {
    samples[3 * i] = quantize(img.data[i].x, bit_depth);
    samples[3 * i + 1] = quantize(img.data[i].y, bit_depth);
    samples[3 * i + 2] = quantize(img.data[i].z, bit_depth);
  }
  write_png(path, img.width, img.height, 3, bit_depth, samples);
}

}  // namespace isomer
