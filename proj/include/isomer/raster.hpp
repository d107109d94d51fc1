// Orthographic rasterizer with differentiable silhouette coverage.
//
// Interior coverage is hard (depth-buffered, front faces only, lowest face
// index wins depth ties). Within a band of 3*sigma pixels around the
// silhouette the mask is a normalized sigmoid of the signed pixel distance to
// the nearest silhouette edge (positive inside), reaching exactly 0/1 at the
// band limits so the forward value is continuous in the vertex positions.
// Normal images interpolate camera-frame vertex normals and renormalize.
#pragma once

#include <vector>

#include "isomer/image.hpp"
#include "isomer/trimesh.hpp"
#include "isomer/views.hpp"

namespace isomer {

struct RasterSettings {
  double sigma = 1.0;      // silhouette softness in pixels
  bool normals = true;     // fill normal_image from interpolated vertex normals
  bool colors = false;     // fill color_image from mesh.colors (or white)
  // Optional per-vertex attribute layer rendered with the same barycentric
  // interpolation (used for constant-target renders).
  const std::vector<Vec3>* attributes = nullptr;
  bool normalize_attributes = false;
};

struct SilhouetteSegment {
  int va, vb;    // mesh vertex ids
  Vec2 pa, pb;   // projected pixel positions
};

struct BandPixel {
  int x, y;
  int segment;   // nearest silhouette segment
  double dist;   // unsigned pixel distance to that segment
  double t;      // clamped projection parameter along the segment
  int sign;      // +1 covered, -1 uncovered
};

struct RenderOutput {
  OrthoView view;
  double sigma = 1.0;
  Image<double> soft_mask;
  Image<Vec3> normal_image;   // camera frame, zero where uncovered
  Image<double> depth;        // camera z, -inf where uncovered
  Image<int> face_id;         // -1 where uncovered
  Image<Vec3> color_image;    // only when settings.colors
  Image<Vec3> attribute_image;

  // Gradient context.
  std::vector<Vec3> cam_vertices;        // camera-frame vertex positions
  std::vector<Vec2> pixel_vertices;      // projected pixel coordinates
  std::vector<Vec3> cam_vertex_normals;  // camera-frame unit vertex normals
  std::vector<char> front_facing;        // per face
  std::vector<SilhouetteSegment> silhouette;
  std::vector<BandPixel> band;
};

RenderOutput rasterize(const TriMesh& mesh, const OrthoView& view,
                       const RasterSettings& settings = {});

// Bilinear sampling at pixel coordinates, clamped to the image bounds.
// Integer-center convention: p = (i + 0.5, j + 0.5) returns pixel (i, j).
double sample_scalar(const Image<double>& img, Vec2 p);
Vec3 sample_vec3(const Image<Vec3>& img, Vec2 p);

// A vertex is visible when one of its faces is front-facing and its projected
// depth is within depth_epsilon of the depth buffer at its pixel. Vertices
// projecting outside the image are not visible.
std::vector<char> vertex_visibility(const TriMesh& mesh, const RenderOutput& rendered,
                                    double depth_epsilon = 1e-3);
std::vector<char> vertex_visibility(const TriMesh& mesh, const OrthoView& view,
                                    double depth_epsilon = 1e-3);

struct GradientBuffer {
  std::vector<Vec3> d_vertex;

  explicit GradientBuffer(size_t n = 0) : d_vertex(n, Vec3{0, 0, 0}) {}
  void accumulate(const GradientBuffer& o) {
    for (size_t i = 0; i < d_vertex.size(); ++i) d_vertex[i] += o.d_vertex[i];
  }
  bool finite() const {
    for (const auto& g : d_vertex)
      if (!is_finite(g)) return false;
    return true;
  }
};

// Chain rule of the soft mask through the signed silhouette distance into the
// two endpoints of each band pixel's nearest silhouette edge. Throws when the
// upstream gradient contains NaN.
GradientBuffer backward_mask(const TriMesh& mesh, const RenderOutput& rendered,
                             const Image<double>& dL_dmask);

// Chain rule of the normal image through renormalization, barycentric
// interpolation (moving projected vertices) and the area-weighted vertex
// normals (moving any vertex of an incident face).
GradientBuffer backward_normal(const TriMesh& mesh, const RenderOutput& rendered,
                               const Image<Vec3>& dL_dnormal);

// Same pixel chain as backward_normal, but the per-vertex attributes are
// constants: gradients flow only through the barycentric weights.
GradientBuffer backward_attribute(const TriMesh& mesh, const RenderOutput& rendered,
                                  const std::vector<Vec3>& attributes, bool normalize,
                                  const Image<Vec3>& dL_dattr);

}  // namespace isomer
