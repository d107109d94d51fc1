#include "isomer/initmesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "isomer/shapes.hpp"
#include "isomer/simplify.hpp"

namespace isomer {

TriMesh depth_to_sheet(const DepthMap& depth, const OrthoView& view, int stride) {
  if (stride < 1) throw std::runtime_error("stride must be >= 1");
  const int w = depth.depth.width, h = depth.depth.height;
  const int gw = (w + stride - 1) / stride, gh = (h + stride - 1) / stride;

  TriMesh mesh;
  Image<int> vertex_id(gw, gh, -1);
  for (int gy = 0; gy < gh; ++gy) {
    for (int gx = 0; gx < gw; ++gx) {
      int px = gx * stride, py = gy * stride;
      if (!depth.valid.at(px, py)) continue;
      vertex_id.at(gx, gy) = int(mesh.vertices.size());
      mesh.vertices.push_back(
          unproject(view, {px + 0.5, py + 0.5}, depth.depth.at(px, py)));
    }
  }
  if (mesh.vertices.empty()) throw std::runtime_error("no valid depth pixels");

  for (int gy = 0; gy + 1 < gh; ++gy) {
    for (int gx = 0; gx + 1 < gw; ++gx) {
      int v00 = vertex_id.at(gx, gy), v10 = vertex_id.at(gx + 1, gy);
      int v01 = vertex_id.at(gx, gy + 1), v11 = vertex_id.at(gx + 1, gy + 1);
      if (v00 < 0 || v10 < 0 || v01 < 0 || v11 < 0) continue;
      // Wound counter-clockwise as seen from the camera.
      mesh.faces.push_back({v00, v01, v10});
      mesh.faces.push_back({v10, v01, v11});
    }
  }
  return mesh;
}

namespace {

Vec3 loop_centroid(const TriMesh& mesh, const std::vector<int>& loop) {
  Vec3 c{0, 0, 0};
  for (int v : loop) c += mesh.vertices[v];
  return c / double(loop.size());
}

// Greedy nearest-vertex strip between loop A (forward) and loop B (walked
// against its induced orientation, as the opposite sheet winds the shared
// silhouette the other way).
void zipper(TriMesh& mesh, const std::vector<int>& a_loop, std::vector<int> b_loop) {
  std::reverse(b_loop.begin(), b_loop.end());
  const int n = int(a_loop.size()), m = int(b_loop.size());

  int b_start = 0;
  double best = 1e300;
  for (int j = 0; j < m; ++j) {
    double d = norm2(mesh.vertices[a_loop[0]] - mesh.vertices[b_loop[j]]);
    if (d < best) {
      best = d;
      b_start = j;
    }
  }

  int ia = 0, ib = 0;
  auto a_at = [&](int i) { return a_loop[i % n]; };
  auto b_at = [&](int j) { return b_loop[(b_start + j) % m]; };
  while (ia < n || ib < m) {
    bool advance_a;
    if (ia == n) advance_a = false;
    else if (ib == m) advance_a = true;
    else {
      double da = norm2(mesh.vertices[a_at(ia + 1)] - mesh.vertices[b_at(ib)]);
      double db = norm2(mesh.vertices[b_at(ib + 1)] - mesh.vertices[a_at(ia)]);
      advance_a = da <= db;
    }
    if (advance_a) {
      mesh.faces.push_back({a_at(ia + 1), a_at(ia), b_at(ib)});
      ia++;
    } else {
      mesh.faces.push_back({b_at(ib), b_at(ib + 1), a_at(ia)});
      ib++;
    }
  }
}

}  // namespace

TriMesh join_sheets(const TriMesh& front, const TriMesh& back) {
  std::vector<std::vector<int>> front_loops = boundary_loops(front);
  std::vector<std::vector<int>> back_loops = boundary_loops(back);
  if (front_loops.size() != back_loops.size())
    throw std::runtime_error("silhouette topology mismatch");

  TriMesh mesh = front;
  const int offset = front.vertex_count();
  mesh.vertices.insert(mesh.vertices.end(), back.vertices.begin(), back.vertices.end());
  for (const auto& t : back.faces)
    mesh.faces.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
  if (front.has_colors() && back.has_colors())
    mesh.colors.insert(mesh.colors.end(), back.colors.begin(), back.colors.end());
  else
    mesh.colors.clear();

  std::vector<bool> used(back_loops.size(), false);
  for (const auto& a_loop : front_loops) {
    Vec3 ca = loop_centroid(front, a_loop);
    int pick = -1;
    double best = 1e300;
    for (int j = 0; j < int(back_loops.size()); ++j) {
      if (used[j]) continue;
      double d = norm2(ca - loop_centroid(back, back_loops[j]));
      if (d < best) {
        best = d;
        pick = j;
      }
    }
    used[pick] = true;
    std::vector<int> b_loop = back_loops[pick];
    for (int& v : b_loop) v += offset;
    zipper(mesh, a_loop, b_loop);
  }
  return mesh;
}

namespace {

// Height of a silhouette-boundary pixel above the true silhouette plane,
// from a local rim-circle fit: z = R * n_z with the rim curvature radius R
// estimated from the inward growth of n_z^2 (n_z^2 ~ 2d/R near the rim).
// Flat rims (n_z ~ 0) report zero height.
double rim_height(const Image<Vec3>& normals, const Image<uint8_t>& valid, int x, int y,
                  double pixel_world_size, double radius_cap) {
  double nzb = std::max(0.0, normals.at(x, y).z);
  const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
  double best_nz = nzb;
  for (int d = 0; d < 4; ++d) {
    int nx = x + dx[d], ny = y + dy[d];
    if (!valid.in_bounds(nx, ny) || !valid.at(nx, ny)) continue;
    best_nz = std::max(best_nz, normals.at(nx, ny).z);
  }
  double delta = best_nz * best_nz - nzb * nzb;
  if (delta <= 1e-9) return 0.0;
  double radius = std::min(radius_cap, 2.0 * pixel_world_size / delta);
  return std::min(radius, radius * nzb);
}

// Shift each connected component so its silhouette-boundary pixels average to
// their estimated rim height; the front and back sheets then meet at the rim.
void align_depth_to_boundary(DepthMap& dm, const Image<Vec3>& normals,
                             double pixel_world_size, double radius_cap) {
  const int w = dm.depth.width, h = dm.depth.height;
  Image<int> component(w, h, -1);
  struct Stats {
    double boundary_sum = 0;
    double rim_height_sum = 0;
    int boundary_count = 0;
    double sum = 0;
    int count = 0;
  };
  std::vector<Stats> stats;
  std::vector<std::pair<int, int>> stack;
  const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!dm.valid.at(x, y) || component.at(x, y) >= 0) continue;
      int id = int(stats.size());
      stats.push_back({});
      component.at(x, y) = id;
      stack.push_back({x, y});
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        bool boundary = false;
        for (int d = 0; d < 4; ++d) {
          int nx = cx + dx[d], ny = cy + dy[d];
          if (!dm.valid.in_bounds(nx, ny) || !dm.valid.at(nx, ny)) {
            boundary = true;
            continue;
          }
          if (component.at(nx, ny) < 0) {
            component.at(nx, ny) = id;
            stack.push_back({nx, ny});
          }
        }
        stats[id].sum += dm.depth.at(cx, cy);
        stats[id].count++;
        if (boundary) {
          stats[id].boundary_sum += dm.depth.at(cx, cy);
          stats[id].rim_height_sum +=
              rim_height(normals, dm.valid, cx, cy, pixel_world_size, radius_cap);
          stats[id].boundary_count++;
        }
      }
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!dm.valid.at(x, y)) continue;
      const Stats& s = stats[component.at(x, y)];
      double shift = s.boundary_count > 0
                         ? (s.boundary_sum - s.rim_height_sum) / s.boundary_count
                         : s.sum / std::max(1, s.count);
      dm.depth.at(x, y) -= shift;
    }
  }
}

}  // namespace

TriMesh estimate_initial_mesh(const ViewObservation& front, const ViewObservation& back,
                              const InitConfig& config) {
  IntegrateOptions opts;
  opts.rotations = config.rotations;
  opts.mode = config.mode;
  opts.pixel_world_size = 2.0 * front.view.ortho_half_extent / front.view.width;
  opts.seed = config.seed;
  DepthMap front_depth = integrate_normals(front.normal_map, front.mask, opts);
  opts.seed = config.seed + 1;
  opts.pixel_world_size = 2.0 * back.view.ortho_half_extent / back.view.width;
  DepthMap back_depth = integrate_normals(back.normal_map, back.mask, opts);

  double radius_cap = front.view.ortho_half_extent;
  align_depth_to_boundary(front_depth, front.normal_map,
                          2.0 * front.view.ortho_half_extent / front.view.width, radius_cap);
  align_depth_to_boundary(back_depth, back.normal_map,
                          2.0 * back.view.ortho_half_extent / back.view.width, radius_cap);

  TriMesh front_sheet = depth_to_sheet(front_depth, front.view, config.stride);
  TriMesh back_sheet = depth_to_sheet(back_depth, back.view, config.stride);
  TriMesh joined = join_sheets(front_sheet, back_sheet);
  return qem_simplify(joined, config.target_faces).mesh;
}

TriMesh sphere_init(int subdivisions) {
  if (subdivisions < 1 || subdivisions > 6)
    throw std::runtime_error("sphere subdivisions must be in [1, 6]");
  return icosphere(0.45, subdivisions);
}

}  // namespace isomer
