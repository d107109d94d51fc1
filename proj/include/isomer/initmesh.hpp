// Initial mesh estimation: front/back normal integration, depth sheets,
// boundary zippering into a closed mesh, and simplification to the face
// budget. Also the icosphere initializer used as the topology-free fallback.
#pragma once

#include "isomer/integrate.hpp"
#include "isomer/trimesh.hpp"
#include "isomer/views.hpp"

namespace isomer {

// Lift valid depth pixels to world space, two triangles per grid cell whose
// four corners are all valid. The result is an open sheet facing the camera.
TriMesh depth_to_sheet(const DepthMap& depth, const OrthoView& view, int stride = 1);

// Connect corresponding boundary loops of two sheets with greedy
// nearest-vertex triangle strips. Loops are paired by centroid; a loop-count
// mismatch throws "silhouette topology mismatch". The output is closed.
TriMesh join_sheets(const TriMesh& front, const TriMesh& back);

struct InitConfig {
  int rotations = 10;
  uint64_t seed = 0;
  IntegrationMode mode = IntegrationMode::slope;
  int target_faces = 2000;
  int stride = 1;
};

// Integrate both normal maps, align each component's depth to its silhouette
// boundary, build and join the sheets, then simplify to the face budget.
// The back observation is expected at azimuth front + 180 degrees.
TriMesh estimate_initial_mesh(const ViewObservation& front, const ViewObservation& back,
                              const InitConfig& config = {});

// Icosphere of radius 0.45, subdivisions in [1, 6].
TriMesh sphere_init(int subdivisions);

}  // namespace isomer
