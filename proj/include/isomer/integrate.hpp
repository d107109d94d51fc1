// Depth-from-normals integration: row-wise cumulative sums repeated under
// random in-plane rotations and averaged, with per-row offsets reconciled
// across rotations.
#pragma once

#include <cstdint>

#include "isomer/image.hpp"

namespace isomer {

struct DepthMap {
  Image<double> depth;
  Image<uint8_t> valid;
};

enum class IntegrationMode {
  // Geometrically exact slope: per-pixel increment -n_x / max(n_z, min_nz)
  // scaled by the world size of a pixel. Default.
  slope,
  // Literal cumulative sum of n_x (dimensionless); kept for fidelity tests.
  paper,
};

struct IntegrateOptions {
  int rotations = 10;        // K; the identity rotation is always included
  uint64_t seed = 0;
  IntegrationMode mode = IntegrationMode::slope;
  double pixel_world_size = 1.0;
  double min_nz = 0.1;
  int align_iters = 12;      // cross-rotation row-offset reconciliation rounds
};

// Normals are camera-frame unit vectors; pixels with mask <= 0.5 are ignored.
// Each connected mask component of the result is shifted to zero mean.
// Throws "empty mask" when no pixel is valid.
DepthMap integrate_normals(const Image<Vec3>& normal_map, const Image<double>& mask,
                           const IntegrateOptions& options = {});

}  // namespace isomer
