// Local mesh surgery: edge split / collapse / flip and the incremental
// remeshing pass that keeps edge lengths near a target during optimization.
#pragma once

#include "isomer/trimesh.hpp"

namespace isomer {

struct EdgeRef {
  int a = -1, b = -1;
};

struct SurgeryResult {
  TriMesh mesh;
  bool applied = false;
};

// Split inserts the edge midpoint and retriangulates both incident faces.
SurgeryResult edge_split(const TriMesh& mesh, EdgeRef edge);

// Collapse merges the endpoints at the edge midpoint. Illegal collapses
// (link condition, pinches, degenerate results) are skipped as no-ops.
SurgeryResult edge_collapse(const TriMesh& mesh, EdgeRef edge);

// Flip rotates the shared diagonal of the two incident faces. Boundary edges
// and flips that would duplicate an existing edge are skipped as no-ops.
SurgeryResult edge_flip(const TriMesh& mesh, EdgeRef edge);

// One remeshing pass: split edges longer than 4/3 * target, collapse edges
// shorter than 4/5 * target where legal, then flip edges when doing so moves
// vertex valences toward 6 (4 on the boundary).
TriMesh remesh_pass(const TriMesh& mesh, double target_edge_length);

}  // namespace isomer
