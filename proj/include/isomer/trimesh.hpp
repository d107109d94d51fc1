// Indexed triangle mesh with optional per-vertex colors, plus the adjacency
// index and validation used by the surgery and rendering code.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "isomer/vec.hpp"

namespace isomer {

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<Vec3> colors;  // empty, or one RGB triple in [0,1] per vertex

  bool has_colors() const { return !colors.empty(); }
  int vertex_count() const { return int(vertices.size()); }
  int face_count() const { return int(faces.size()); }
};

struct Bounds3 {
  Vec3 lo{1e300, 1e300, 1e300};
  Vec3 hi{-1e300, -1e300, -1e300};
  void expand(const Vec3& p) { lo = cwise_min(lo, p); hi = cwise_max(hi, p); }
  Vec3 extent() const { return hi - lo; }
  Vec3 center() const { return (lo + hi) * 0.5; }
  double diagonal() const { return norm(extent()); }
};

Bounds3 bounds(const TriMesh& mesh);

inline uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (uint64_t(uint32_t(a)) << 32) | uint32_t(b);
}

struct AdjacencyIndex {
  struct Edge {
    int a, b;         // a < b
    int face[2];      // incident faces, -1 when absent
    int face_count;   // may exceed 2 on non-manifold input (faces beyond 2 dropped)
  };
  std::vector<Edge> edges;
  std::unordered_map<uint64_t, int> edge_lookup;
  std::vector<std::vector<int>> vertex_faces;
  std::vector<std::vector<int>> vertex_neighbors;

  int edge_index(int a, int b) const {
    auto it = edge_lookup.find(edge_key(a, b));
    return it == edge_lookup.end() ? -1 : it->second;
  }
};

AdjacencyIndex build_adjacency(const TriMesh& mesh);

// Unnormalized face normal (cross product); its norm is twice the face area.
inline Vec3 face_normal_scaled(const TriMesh& mesh, int f) {
  const auto& t = mesh.faces[f];
  return cross(mesh.vertices[t[1]] - mesh.vertices[t[0]],
               mesh.vertices[t[2]] - mesh.vertices[t[0]]);
}

double surface_area(const TriMesh& mesh);

// Area-weighted vertex normals, unit length. Vertices touched only by
// zero-area faces (or no faces) get +z. Throws on an empty mesh.
std::vector<Vec3> vertex_normals(const TriMesh& mesh);

// Throws std::runtime_error describing the first violated invariant:
// index range, repeated vertex in a face, edges with >2 faces, or
// inconsistent winding across a shared edge.
void validate_mesh(const TriMesh& mesh);

int boundary_edge_count(const TriMesh& mesh);
bool is_edge_manifold(const TriMesh& mesh);
bool is_closed_manifold(const TriMesh& mesh);
int euler_characteristic(const TriMesh& mesh);
int connected_component_count(const TriMesh& mesh);
// Genus of a closed orientable mesh: sum over components of (2 - chi_c) / 2.
int genus(const TriMesh& mesh);

// Boundary loops as ordered vertex lists following the orientation induced by
// face winding (each boundary edge u->v appears in exactly one face).
std::vector<std::vector<int>> boundary_loops(const TriMesh& mesh);

// Drop vertices not referenced by any face, remapping face indices.
TriMesh compact(const TriMesh& mesh);

}  // namespace isomer
