#include "isomer/shapes.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace isomer {

TriMesh icosphere(double radius, int subdivisions) {
  if (subdivisions < 0 || subdivisions > 7) throw std::runtime_error("bad subdivision count");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  TriMesh mesh;
  mesh.vertices = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
                   {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
                   {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  mesh.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (auto& v : mesh.vertices) v = normalized(v);

  for (int s = 0; s < subdivisions; ++s) {
    std::unordered_map<uint64_t, int> midpoint;
    auto mid = [&](int a, int b) {
      uint64_t key = edge_key(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      int m = int(mesh.vertices.size());
      mesh.vertices.push_back(normalized(mesh.vertices[a] + mesh.vertices[b]));
      midpoint.emplace(key, m);
      return m;
    };
    std::vector<std::array<int, 3>> faces;
    faces.reserve(mesh.faces.size() * 4);
    for (const auto& t : mesh.faces) {
      int m01 = mid(t[0], t[1]), m12 = mid(t[1], t[2]), m20 = mid(t[2], t[0]);
      faces.push_back({t[0], m01, m20});
      faces.push_back({t[1], m12, m01});
      faces.push_back({t[2], m20, m12});
      faces.push_back({m01, m12, m20});
    }
    mesh.faces = std::move(faces);
  }
  for (auto& v : mesh.vertices) v *= radius;
  return mesh;
}

TriMesh torus(double ring_radius, double tube_radius, int ring_segments, int tube_segments) {
  TriMesh mesh;
  for (int i = 0; i < ring_segments; ++i) {
    double u = 2.0 * kPi * i / ring_segments;
    for (int j = 0; j < tube_segments; ++j) {
      double v = 2.0 * kPi * j / tube_segments;
      double r = ring_radius + tube_radius * std::cos(v);
      mesh.vertices.push_back({r * std::cos(u), r * std::sin(u), tube_radius * std::sin(v)});
    }
  }
  auto idx = [&](int i, int j) {
    return (i % ring_segments) * tube_segments + (j % tube_segments);
  };
  for (int i = 0; i < ring_segments; ++i) {
    for (int j = 0; j < tube_segments; ++j) {
      int a = idx(i, j), b = idx(i + 1, j), c = idx(i + 1, j + 1), d = idx(i, j + 1);
      mesh.faces.push_back({a, b, c});
      mesh.faces.push_back({a, c, d});
    }
  }
  return mesh;
}

TriMesh box(const Vec3& half_extents, double max_edge) {
  TriMesh mesh;
  std::map<std::array<long long, 3>, int> dedupe;
  auto vertex = [&](const Vec3& p) {
    std::array<long long, 3> key = {llround(p.x * 1e9), llround(p.y * 1e9), llround(p.z * 1e9)};
    auto it = dedupe.find(key);
    if (it != dedupe.end()) return it->second;
    int v = int(mesh.vertices.size());
    mesh.vertices.push_back(p);
    dedupe.emplace(key, v);
    return v;
  };

  // Each face: origin corner + two edge vectors, tessellated as an n x m grid
  // wound so normals point outward.
  struct Face {
    Vec3 origin, eu, ev;
  };
  const Vec3 e = half_extents;
  const Face sides[6] = {
      {{-e.x, -e.y, e.z}, {2 * e.x, 0, 0}, {0, 2 * e.y, 0}},    // +z
      {{e.x, -e.y, -e.z}, {-2 * e.x, 0, 0}, {0, 2 * e.y, 0}},   // -z
      {{e.x, -e.y, e.z}, {0, 0, -2 * e.z}, {0, 2 * e.y, 0}},    // +x
      {{-e.x, -e.y, -e.z}, {0, 0, 2 * e.z}, {0, 2 * e.y, 0}},   // -x
      {{-e.x, e.y, e.z}, {2 * e.x, 0, 0}, {0, 0, -2 * e.z}},    // +y
      {{-e.x, -e.y, -e.z}, {2 * e.x, 0, 0}, {0, 0, 2 * e.z}},   // -y
  };
  for (const auto& face : sides) {
    int nu = std::max(1, int(std::ceil(norm(face.eu) / max_edge)));
    int nv = std::max(1, int(std::ceil(norm(face.ev) / max_edge)));
    for (int i = 0; i < nu; ++i) {
      for (int j = 0; j < nv; ++j) {
        Vec3 p00 = face.origin + face.eu * (double(i) / nu) + face.ev * (double(j) / nv);
        Vec3 p10 = face.origin + face.eu * (double(i + 1) / nu) + face.ev * (double(j) / nv);
        Vec3 p01 = face.origin + face.eu * (double(i) / nu) + face.ev * (double(j + 1) / nv);
        Vec3 p11 = face.origin + face.eu * (double(i + 1) / nu) + face.ev * (double(j + 1) / nv);
        int a = vertex(p00), b = vertex(p10), c = vertex(p11), d = vertex(p01);
        mesh.faces.push_back({a, b, c});
        mesh.faces.push_back({a, c, d});
      }
    }
  }
  return mesh;
}

TriMesh with_position_colors(TriMesh mesh) {
  mesh.colors.resize(mesh.vertices.size());
  for (size_t i = 0; i < mesh.vertices.size(); ++i)
    mesh.colors[i] = clamp01(mesh.vertices[i] + Vec3{0.5, 0.5, 0.5});
  return mesh;
}

}  // namespace isomer
