// Per-vertex explicit optimization targets, the refinement stage driven by
// them, vertex colorization, and invisible-region color completion.
#pragma once

#include "isomer/optimize.hpp"
#include "isomer/raster.hpp"
#include "isomer/trimesh.hpp"
#include "isomer/views.hpp"

namespace isomer {

enum class TargetPayload { normals, rgb };

enum class EtNormalization {
  weight_sum,        // divide by the accumulated cos^2 weights (default)
  visibility_count,  // divide by the number of visible views
};

struct VertexTargets {
  std::vector<Vec3> values;   // zero vector where covered is false
  std::vector<char> covered;  // true when some view saw the vertex
};

// For each vertex, the cos^2(vertex normal, view direction)-weighted mean of
// the per-view samples at its projected position, over views where the
// vertex is visible. Normal payloads are sampled from the camera-frame normal
// maps, rotated to world space, and renormalized after averaging.
VertexTargets compute_explicit_target(const TriMesh& mesh,
                                      const std::vector<ViewObservation>& observations,
                                      TargetPayload payload,
                                      EtNormalization normalization = EtNormalization::weight_sum,
                                      double depth_epsilon = 1e-3);

// Mask-weighted squared difference between the rendered normals and the
// rendering of the target normals as interpolated vertex attributes. Targets
// are constants: no gradient flows through them.
LossValue loss_explicit_target(const TriMesh& mesh,
                               const std::vector<ViewObservation>& observations,
                               const VertexTargets& targets, double sigma = 1.0);

// Refinement loop: recompute targets each iteration (remeshing changes the
// vertex set), then SGD on mask + target loss with the same remeshing and
// expansion machinery as the coarse stage. With use_explicit_target = false
// the loop runs on the plain normal loss instead (ablation arm).
OptimizeResult refine(const TriMesh& mesh, const std::vector<ViewObservation>& observations,
                      const ReconConfig& config, bool use_explicit_target = true);

// Vertex colors from the rgb explicit target (clamped to [0,1]); vertices no
// view saw are filled by color_completion.
TriMesh colorize(const TriMesh& mesh, const std::vector<ViewObservation>& observations);

// Multi-pass neighbor-mean color propagation into the invisible set, with the
// pass budget extended past full coverage so seams keep smoothing. Updates
// within a pass are visible to later vertices (ascending index order).
// Components unreachable from any colored vertex fall back to mid-gray after
// 10 * vertex_count passes.
std::vector<Vec3> color_completion(const TriMesh& mesh, const std::vector<int>& invisible,
                                   std::vector<Vec3> colors);

}  // namespace isomer
