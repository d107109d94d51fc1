// Soft silhouette profile shared by the forward and backward passes.
//
// Quintic smoothstep over the band argument x = d_signed / sigma in [-3, 3]:
// exactly 0/1 at the band limits with vanishing first and second derivatives,
// so the soft mask is C^2 in the vertex positions everywhere, and exactly 0.5
// on the silhouette edge.
#pragma once

#include <algorithm>

namespace isomer {

struct BandProfile {
  static double value(double x) {
    double t = std::clamp((x + 3.0) / 6.0, 0.0, 1.0);
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0);
  }
  // d value / d x
  static double derivative(double x) {
    double t = std::clamp((x + 3.0) / 6.0, 0.0, 1.0);
    double u = t * (1.0 - t);
    return 30.0 * u * u / 6.0;
  }
};

}  // namespace isomer
