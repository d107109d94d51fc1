// Minimal PNG read/write (8- or 16-bit, gray/RGB/RGBA) over libpng.
#pragma once

#include <string>

#include "isomer/image.hpp"

namespace isomer {

struct PngData {
  Image<Vec3> rgb;      // values in [0,1]; gray replicated across channels
  Image<double> alpha;  // empty unless the file had an alpha channel
  int bit_depth = 8;
  bool has_alpha() const { return !alpha.data.empty(); }
};

PngData read_png(const std::string& path);

void write_png_gray(const std::string& path, const Image<double>& img, int bit_depth = 8);
void write_png_rgb(const std::string& path, const Image<Vec3>& img, int bit_depth = 8);

}  // namespace isomer
