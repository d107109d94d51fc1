#include "isomer/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "band_profile.hpp"
#include "isomer/parallel.hpp"

namespace isomer {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct SegmentGrid {
  int cell = 16;
  int nx = 0, ny = 0;
  std::vector<std::vector<int>> bins;

  void build(const std::vector<SilhouetteSegment>& segments, int w, int h, double radius) {
    cell = std::max(16, int(std::ceil(radius)) + 2);
    nx = (w + cell - 1) / cell;
    ny = (h + cell - 1) / cell;
    bins.assign(size_t(nx) * ny, {});
    for (int s = 0; s < int(segments.size()); ++s) {
      const auto& seg = segments[s];
      double x0 = std::min(seg.pa.x, seg.pb.x) - radius - 1;
      double x1 = std::max(seg.pa.x, seg.pb.x) + radius + 1;
      double y0 = std::min(seg.pa.y, seg.pb.y) - radius - 1;
      double y1 = std::max(seg.pa.y, seg.pb.y) + radius + 1;
      int cx0 = std::clamp(int(std::floor(x0 / cell)), 0, nx - 1);
      int cx1 = std::clamp(int(std::floor(x1 / cell)), 0, nx - 1);
      int cy0 = std::clamp(int(std::floor(y0 / cell)), 0, ny - 1);
      int cy1 = std::clamp(int(std::floor(y1 / cell)), 0, ny - 1);
      if (x1 < 0 || y1 < 0 || x0 >= w || y0 >= h) continue;
      for (int cy = cy0; cy <= cy1; ++cy)
        for (int cx = cx0; cx <= cx1; ++cx) bins[size_t(cy) * nx + cx].push_back(s);
    }
  }

  const std::vector<int>& at_pixel(int x, int y) const {
    int cx = std::clamp(x / cell, 0, nx - 1);
    int cy = std::clamp(y / cell, 0, ny - 1);
    return bins[size_t(cy) * nx + cx];
  }
};

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b, double& t_out) {
  Vec2 ab = b - a;
  double len2 = dot(ab, ab);
  double t = len2 > 0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  Vec2 q = a + ab * t;
  t_out = t;
  return norm(p - q);
}

}  // namespace

RenderOutput rasterize(const TriMesh& mesh, const OrthoView& view,
                       const RasterSettings& settings) {
  const int w = view.width, h = view.height;
  RenderOutput out;
  out.view = view;
  out.sigma = settings.sigma;
  out.soft_mask = Image<double>(w, h, 0.0);
  out.depth = Image<double>(w, h, kNegInf);
  out.face_id = Image<int>(w, h, -1);
  if (settings.normals) out.normal_image = Image<Vec3>(w, h, Vec3{0, 0, 0});
  if (settings.colors) out.color_image = Image<Vec3>(w, h, Vec3{1, 1, 1});
  if (settings.attributes) out.attribute_image = Image<Vec3>(w, h, Vec3{0, 0, 0});

  const int nv = mesh.vertex_count();
  const Mat3 rot = view.world_to_camera();
  out.cam_vertices.resize(nv);
  out.pixel_vertices.resize(nv);
  const double sx = 0.5 * w / view.ortho_half_extent;
  const double sy = 0.5 * h / view.ortho_half_extent;
  for (int v = 0; v < nv; ++v) {
    Vec3 cam = rot * mesh.vertices[v];
    out.cam_vertices[v] = cam;
    out.pixel_vertices[v] = {cam.x * sx + 0.5 * w, 0.5 * h - cam.y * sy};
  }

  if (settings.normals && !mesh.faces.empty()) {
    std::vector<Vec3> world_normals = vertex_normals(mesh);
    out.cam_vertex_normals.resize(nv);
    for (int v = 0; v < nv; ++v) out.cam_vertex_normals[v] = rot * world_normals[v];
  }

  out.front_facing.assign(mesh.face_count(), 0);
  for (int f = 0; f < mesh.face_count(); ++f) {
    const auto& t = mesh.faces[f];
    Vec3 n = cross(out.cam_vertices[t[1]] - out.cam_vertices[t[0]],
                   out.cam_vertices[t[2]] - out.cam_vertices[t[0]]);
    out.front_facing[f] = n.z > 0.0;
  }

  std::vector<Vec3> color_attr;
  if (settings.colors) {
    color_attr.resize(nv);
    for (int v = 0; v < nv; ++v)
      color_attr[v] = mesh.has_colors() ? mesh.colors[v]
                                        : clamp01(mesh.vertices[v] + Vec3{0.5, 0.5, 0.5});
  }

  // Coverage: bin front faces by row blocks, then rasterize blocks in
  // parallel (each pixel is owned by exactly one block).
  const int block_rows = 8;
  const int num_blocks = (h + block_rows - 1) / block_rows;
  std::vector<std::vector<int>> face_bins(num_blocks);
  for (int f = 0; f < mesh.face_count(); ++f) {
    if (!out.front_facing[f]) continue;
    const auto& t = mesh.faces[f];
    double y0 = std::min({out.pixel_vertices[t[0]].y, out.pixel_vertices[t[1]].y,
                          out.pixel_vertices[t[2]].y});
    double y1 = std::max({out.pixel_vertices[t[0]].y, out.pixel_vertices[t[1]].y,
                          out.pixel_vertices[t[2]].y});
    int b0 = std::clamp(int(std::floor(y0)) / block_rows, 0, num_blocks - 1);
    int b1 = std::clamp(int(std::floor(y1)) / block_rows, 0, num_blocks - 1);
    if (y1 < 0 || y0 >= h) continue;
    for (int b = b0; b <= b1; ++b) face_bins[b].push_back(f);
  }

  parallel_blocks(num_blocks, [&](int block) {
    int row0 = block * block_rows;
    int row1 = std::min(h, row0 + block_rows);
    for (int f : face_bins[block]) {
      const auto& t = mesh.faces[f];
      Vec2 q0 = out.pixel_vertices[t[0]], q1 = out.pixel_vertices[t[1]],
           q2 = out.pixel_vertices[t[2]];
      double area = cross2(q1 - q0, q2 - q0);
      if (std::abs(area) < 1e-14) continue;
      double inv_area = 1.0 / area;
      double sgn = area > 0 ? 1.0 : -1.0;
      int x0 = std::max(0, int(std::floor(std::min({q0.x, q1.x, q2.x}))));
      int x1 = std::min(w - 1, int(std::ceil(std::max({q0.x, q1.x, q2.x}))));
      int y0 = std::max(row0, int(std::floor(std::min({q0.y, q1.y, q2.y}))));
      int y1 = std::min(row1 - 1, int(std::ceil(std::max({q0.y, q1.y, q2.y}))));
      for (int py = y0; py <= y1; ++py) {
        for (int px = x0; px <= x1; ++px) {
          Vec2 p{px + 0.5, py + 0.5};
          double w0 = cross2(q1 - p, q2 - p);
          double w1 = cross2(q2 - p, q0 - p);
          double w2 = cross2(q0 - p, q1 - p);
          if (w0 * sgn < 0 || w1 * sgn < 0 || w2 * sgn < 0) continue;
          double b0 = w0 * inv_area, b1 = w1 * inv_area, b2 = w2 * inv_area;
          double z = b0 * out.cam_vertices[t[0]].z + b1 * out.cam_vertices[t[1]].z +
                     b2 * out.cam_vertices[t[2]].z;
          if (z <= out.depth.at(px, py)) continue;
          out.depth.at(px, py) = z;
          out.face_id.at(px, py) = f;
          out.soft_mask.at(px, py) = 1.0;
          if (settings.normals) {
            Vec3 m = out.cam_vertex_normals[t[0]] * b0 + out.cam_vertex_normals[t[1]] * b1 +
                     out.cam_vertex_normals[t[2]] * b2;
            out.normal_image.at(px, py) = normalized(m);
          }
          if (settings.colors) {
            out.color_image.at(px, py) = clamp01(color_attr[t[0]] * b0 + color_attr[t[1]] * b1 +
                                                 color_attr[t[2]] * b2);
          }
          if (settings.attributes) {
            const auto& attr = *settings.attributes;
            Vec3 a = attr[t[0]] * b0 + attr[t[1]] * b1 + attr[t[2]] * b2;
            out.attribute_image.at(px, py) = settings.normalize_attributes ? normalized(a) : a;
          }
        }
      }
    }
  });

  // Silhouette edges: edges with exactly one front-facing incident face.
  {
    AdjacencyIndex adj = build_adjacency(mesh);
    for (const auto& e : adj.edges) {
      int front = 0;
      for (int k = 0; k < 2; ++k)
        if (e.face[k] >= 0 && out.front_facing[e.face[k]]) front++;
      if (e.face_count <= 2 && front == 1)
        out.silhouette.push_back({e.a, e.b, out.pixel_vertices[e.a], out.pixel_vertices[e.b]});
    }
  }

  // Soft band around the silhouette.
  if (!out.silhouette.empty() && settings.sigma > 0.0) {
    const double radius = 3.0 * settings.sigma;
    SegmentGrid grid;
    grid.build(out.silhouette, w, h, radius);

    Image<uint8_t> candidate(w, h, 0);
    for (const auto& seg : out.silhouette) {
      int x0 = std::max(0, int(std::floor(std::min(seg.pa.x, seg.pb.x) - radius)));
      int x1 = std::min(w - 1, int(std::ceil(std::max(seg.pa.x, seg.pb.x) + radius)));
      int y0 = std::max(0, int(std::floor(std::min(seg.pa.y, seg.pb.y) - radius)));
      int y1 = std::min(h - 1, int(std::ceil(std::max(seg.pa.y, seg.pb.y) + radius)));
      for (int py = y0; py <= y1; ++py)
        for (int px = x0; px <= x1; ++px) candidate.at(px, py) = 1;
    }

    for (int py = 0; py < h; ++py) {
      for (int px = 0; px < w; ++px) {
        if (!candidate.at(px, py)) continue;
        Vec2 p{px + 0.5, py + 0.5};
        double best = radius;
        int best_seg = -1;
        double best_t = 0.0;
        for (int s : grid.at_pixel(px, py)) {
          double t;
          double d = point_segment_distance(p, out.silhouette[s].pa, out.silhouette[s].pb, t);
          if (d < best) {
            best = d;
            best_seg = s;
            best_t = t;
          }
        }
        if (best_seg < 0) continue;
        int sign = out.face_id.at(px, py) >= 0 ? 1 : -1;
        out.soft_mask.at(px, py) = BandProfile::value(sign * best / settings.sigma);
        out.band.push_back({px, py, best_seg, best, best_t, sign});
      }
    }
  }

  return out;
}

double sample_scalar(const Image<double>& img, Vec2 p) {
  double u = p.x - 0.5, v = p.y - 0.5;
  int x0 = std::clamp(int(std::floor(u)), 0, img.width - 1);
  int y0 = std::clamp(int(std::floor(v)), 0, img.height - 1);
  int x1 = std::min(x0 + 1, img.width - 1);
  int y1 = std::min(y0 + 1, img.height - 1);
  double fx = std::clamp(u - x0, 0.0, 1.0), fy = std::clamp(v - y0, 0.0, 1.0);
  return img.at(x0, y0) * (1 - fx) * (1 - fy) + img.at(x1, y0) * fx * (1 - fy) +
         img.at(x0, y1) * (1 - fx) * fy + img.at(x1, y1) * fx * fy;
}

Vec3 sample_vec3(const Image<Vec3>& img, Vec2 p) {
  double u = p.x - 0.5, v = p.y - 0.5;
  int x0 = std::clamp(int(std::floor(u)), 0, img.width - 1);
  int y0 = std::clamp(int(std::floor(v)), 0, img.height - 1);
  int x1 = std::min(x0 + 1, img.width - 1);
  int y1 = std::min(y0 + 1, img.height - 1);
  double fx = std::clamp(u - x0, 0.0, 1.0), fy = std::clamp(v - y0, 0.0, 1.0);
  return img.at(x0, y0) * ((1 - fx) * (1 - fy)) + img.at(x1, y0) * (fx * (1 - fy)) +
         img.at(x0, y1) * ((1 - fx) * fy) + img.at(x1, y1) * (fx * fy);
}

std::vector<char> vertex_visibility(const TriMesh& mesh, const RenderOutput& rendered,
                                    double depth_epsilon) {
  std::vector<char> front_vertex(mesh.vertex_count(), 0);
  for (int f = 0; f < mesh.face_count(); ++f) {
    if (!rendered.front_facing[f]) continue;
    for (int k = 0; k < 3; ++k) front_vertex[mesh.faces[f][k]] = 1;
  }
  // Interpolated-normal facing test: a vertex whose own surface normal backs
  // away from the camera belongs to the hidden side even when it pokes past
  // the discrete silhouette, and any sample taken there would come from the
  // surface in front of it.
  std::vector<Vec3> cam_normals = rendered.cam_vertex_normals;
  if (cam_normals.empty() && !mesh.faces.empty()) {
    std::vector<Vec3> world = vertex_normals(mesh);
    Mat3 rot = rendered.view.world_to_camera();
    cam_normals.resize(world.size());
    for (size_t i = 0; i < world.size(); ++i) cam_normals[i] = rot * world[i];
  }

  std::vector<char> visible(mesh.vertex_count(), 0);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (!front_vertex[v]) continue;
    if (cam_normals[v].z <= 0.0) continue;
    Vec2 p = rendered.pixel_vertices[v];
    int px = int(std::floor(p.x)), py = int(std::floor(p.y));
    if (!rendered.depth.in_bounds(px, py)) continue;

    // Candidate occluders are the faces covering the 3x3 pixel neighborhood;
    // one occludes the vertex when it contains the exact projected position
    // and its interpolated depth is closer than the vertex by more than
    // depth_epsilon. Buffer lookups at pixel centers instead misjudge rim
    // vertices by up to half a pixel of surface slope.
    bool occluded = false;
    int last_face = -1;
    for (int dy = -1; dy <= 1 && !occluded; ++dy) {
      for (int dx = -1; dx <= 1 && !occluded; ++dx) {
        int xx = px + dx, yy = py + dy;
        if (!rendered.face_id.in_bounds(xx, yy)) continue;
        int f = rendered.face_id.at(xx, yy);
        if (f < 0 || f == last_face) continue;
        last_face = f;
        const auto& t = mesh.faces[f];
        Vec2 q0 = rendered.pixel_vertices[t[0]], q1 = rendered.pixel_vertices[t[1]],
             q2 = rendered.pixel_vertices[t[2]];
        double w0 = cross2(q1 - p, q2 - p);
        double w1 = cross2(q2 - p, q0 - p);
        double w2 = cross2(q0 - p, q1 - p);
        double area = w0 + w1 + w2;
        if (std::abs(area) < 1e-14) continue;
        double sgn = area > 0 ? 1.0 : -1.0;
        if (w0 * sgn < 0 || w1 * sgn < 0 || w2 * sgn < 0) continue;  // outside the face
        double depth = (w0 * rendered.cam_vertices[t[0]].z +
                        w1 * rendered.cam_vertices[t[1]].z +
                        w2 * rendered.cam_vertices[t[2]].z) /
                       area;
        if (depth > rendered.cam_vertices[v].z + depth_epsilon) occluded = true;
      }
    }
    if (!occluded) visible[v] = 1;
  }
  return visible;
}

std::vector<char> vertex_visibility(const TriMesh& mesh, const OrthoView& view,
                                    double depth_epsilon) {
  RasterSettings s;
  s.normals = false;
  return vertex_visibility(mesh, rasterize(mesh, view, s), depth_epsilon);
}

}  // namespace isomer
