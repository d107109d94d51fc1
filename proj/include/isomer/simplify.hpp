// Quadric-error-metric edge-collapse simplification.
#pragma once

#include "isomer/trimesh.hpp"

namespace isomer {

struct SimplifyResult {
  TriMesh mesh;
  // False when no further legal collapse existed before reaching the target.
  bool reached_target = true;
};

// Collapse edges in ascending quadric-cost order until the face count drops
// to `target_faces` (landing in [target_faces - 2, target_faces]). Vertices
// are placed at the quadric-optimal point, falling back to the best of
// midpoint/endpoints when the quadric is singular.
SimplifyResult qem_simplify(const TriMesh& mesh, int target_faces);

}  // namespace isomer
