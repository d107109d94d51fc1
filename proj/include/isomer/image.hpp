// Row-major image container plus the normal-map RGB encoding convention:
// rgb = (n + 1) / 2, background written as mid-gray (0.5, 0.5, 0.5).
#pragma once

#include <optional>
#include <vector>

#include "isomer/vec.hpp"

namespace isomer {

template <class T>
struct Image {
  int width = 0, height = 0;
  std::vector<T> data;

  Image() = default;
  Image(int w, int h, T fill = T{}) : width(w), height(h), data(size_t(w) * h, fill) {}

  T& at(int x, int y) { return data[size_t(y) * width + x]; }
  const T& at(int x, int y) const { return data[size_t(y) * width + x]; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  size_t pixel_count() const { return data.size(); }
};

inline Vec3 encode_normal(const Vec3& n) { return (n + Vec3{1, 1, 1}) * 0.5; }

// Inverts the encoding and renormalizes. The exact background value
// (0.5, 0.5, 0.5) inverts to the zero vector and is reported as invalid;
// callers exclude such pixels via the mask.
inline std::optional<Vec3> decode_normal(const Vec3& rgb) {
  Vec3 v = rgb * 2.0 - Vec3{1, 1, 1};
  double n = norm(v);
  if (n < 1e-9) return std::nullopt;
  return v / n;
}

}  // namespace isomer
