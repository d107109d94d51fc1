#include "isomer/trimesh.hpp"

#include <algorithm>
#include <stdexcept>

namespace isomer {

Bounds3 bounds(const TriMesh& mesh) {
  Bounds3 b;
  for (const auto& v : mesh.vertices) b.expand(v);
  return b;
}

AdjacencyIndex build_adjacency(const TriMesh& mesh) {
  AdjacencyIndex adj;
  adj.vertex_faces.resize(mesh.vertices.size());
  adj.vertex_neighbors.resize(mesh.vertices.size());
  adj.edge_lookup.reserve(mesh.faces.size() * 2);

  for (int f = 0; f < mesh.face_count(); ++f) {
    const auto& t = mesh.faces[f];
    for (int k = 0; k < 3; ++k) {
      adj.vertex_faces[t[k]].push_back(f);
      int a = t[k], b = t[(k + 1) % 3];
      uint64_t key = edge_key(a, b);
      auto it = adj.edge_lookup.find(key);
      if (it == adj.edge_lookup.end()) {
        AdjacencyIndex::Edge e;
        e.a = std::min(a, b);
        e.b = std::max(a, b);
        e.face[0] = f;
        e.face[1] = -1;
        e.face_count = 1;
        adj.edge_lookup.emplace(key, int(adj.edges.size()));
        adj.edges.push_back(e);
      } else {
        auto& e = adj.edges[it->second];
        if (e.face_count < 2) e.face[e.face_count] = f;
        e.face_count++;
      }
    }
  }
  for (const auto& e : adj.edges) {
    adj.vertex_neighbors[e.a].push_back(e.b);
    adj.vertex_neighbors[e.b].push_back(e.a);
  }
  for (auto& nb : adj.vertex_neighbors) std::sort(nb.begin(), nb.end());
  return adj;
}

double surface_area(const TriMesh& mesh) {
  double a = 0;
  for (int f = 0; f < mesh.face_count(); ++f) a += 0.5 * norm(face_normal_scaled(mesh, f));
  return a;
}

std::vector<Vec3> vertex_normals(const TriMesh& mesh) {
  if (mesh.faces.empty()) throw std::runtime_error("empty mesh");
  std::vector<Vec3> acc(mesh.vertices.size(), Vec3{0, 0, 0});
  for (int f = 0; f < mesh.face_count(); ++f) {
    Vec3 n = face_normal_scaled(mesh, f);  // area-weighted
    for (int k = 0; k < 3; ++k) acc[mesh.faces[f][k]] += n;
  }
  for (auto& n : acc) n = normalized(n, {0, 0, 1});
  return acc;
}

void validate_mesh(const TriMesh& mesh) {
  const int nv = mesh.vertex_count();
  for (int f = 0; f < mesh.face_count(); ++f) {
    const auto& t = mesh.faces[f];
    for (int k = 0; k < 3; ++k) {
      if (t[k] < 0 || t[k] >= nv)
        throw std::runtime_error("face " + std::to_string(f) + " references vertex " +
                                 std::to_string(t[k]) + " out of range");
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      throw std::runtime_error("face " + std::to_string(f) + " repeats a vertex");
  }
  if (!mesh.colors.empty() && int(mesh.colors.size()) != nv)
    throw std::runtime_error("color count does not match vertex count");

  // Edge manifoldness and winding consistency. A consistently wound pair of
  // faces traverses their shared edge in opposite directions.
  std::unordered_map<uint64_t, std::pair<int, int>> dir;  // key -> (fwd, bwd) counts
  dir.reserve(mesh.faces.size() * 2);
  for (int f = 0; f < mesh.face_count(); ++f) {
    const auto& t = mesh.faces[f];
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      auto& d = dir[edge_key(a, b)];
      if (a < b) d.first++; else d.second++;
    }
  }
  for (const auto& [key, d] : dir) {
    int total = d.first + d.second;
    if (total > 2)
      throw std::runtime_error("edge with " + std::to_string(total) + " incident faces");
    if (total == 2 && (d.first != 1 || d.second != 1))
      throw std::runtime_error("inconsistent winding across a shared edge");
  }
}

int boundary_edge_count(const TriMesh& mesh) {
  AdjacencyIndex adj = build_adjacency(mesh);
  int n = 0;
  for (const auto& e : adj.edges) n += (e.face_count == 1);
  return n;
}

bool is_edge_manifold(const TriMesh& mesh) {
  AdjacencyIndex adj = build_adjacency(mesh);
  for (const auto& e : adj.edges)
    if (e.face_count > 2) return false;
  return true;
}

bool is_closed_manifold(const TriMesh& mesh) {
  AdjacencyIndex adj = build_adjacency(mesh);
  for (const auto& e : adj.edges)
    if (e.face_count != 2) return false;
  return true;
}

int euler_characteristic(const TriMesh& mesh) {
  AdjacencyIndex adj = build_adjacency(mesh);
  int used_vertices = 0;
  for (const auto& vf : adj.vertex_faces) used_vertices += !vf.empty();
  return used_vertices - int(adj.edges.size()) + mesh.face_count();
}

int connected_component_count(const TriMesh& mesh) {
  AdjacencyIndex adj = build_adjacency(mesh);
  std::vector<int> comp(mesh.vertices.size(), -1);
  int count = 0;
  std::vector<int> stack;
  for (int seed = 0; seed < mesh.vertex_count(); ++seed) {
    if (comp[seed] >= 0 || adj.vertex_faces[seed].empty()) continue;
    comp[seed] = count;
    stack.push_back(seed);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int n : adj.vertex_neighbors[v]) {
        if (comp[n] < 0) {
          comp[n] = count;
          stack.push_back(n);
        }
      }
    }
    count++;
  }
  return count;
}

int genus(const TriMesh& mesh) {
  int chi = euler_characteristic(mesh);
  int comps = connected_component_count(mesh);
  return (2 * comps - chi) / 2;
}

std::vector<std::vector<int>> boundary_loops(const TriMesh& mesh) {
  // Directed boundary edges: a->b appearing in exactly one face, with no
  // opposite b->a. Follow successor links to trace loops.
  std::unordered_map<uint64_t, int> count;
  count.reserve(mesh.faces.size() * 2);
  for (const auto& t : mesh.faces)
    for (int k = 0; k < 3; ++k) count[edge_key(t[k], t[(k + 1) % 3])]++;

  std::unordered_map<int, int> next;  // boundary successor per vertex
  for (const auto& t : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      if (count[edge_key(a, b)] == 1) next[a] = b;
    }
  }
  std::vector<std::vector<int>> loops;
  std::unordered_map<int, bool> visited;
  for (const auto& [start, _] : next) {
    if (visited[start]) continue;
    std::vector<int> loop;
    int v = start;
    while (!visited[v]) {
      visited[v] = true;
      loop.push_back(v);
      auto it = next.find(v);
      if (it == next.end()) break;  // open chain on non-manifold input
      v = it->second;
    }
    if (loop.size() >= 3) loops.push_back(std::move(loop));
  }
  return loops;
}

TriMesh compact(const TriMesh& mesh) {
  // Stable: surviving vertices keep their relative order.
  std::vector<int> remap(mesh.vertices.size(), -1);
  for (const auto& t : mesh.faces)
    for (int k = 0; k < 3; ++k) remap[t[k]] = 0;
  TriMesh out;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (remap[v] < 0) continue;
    remap[v] = int(out.vertices.size());
    out.vertices.push_back(mesh.vertices[v]);
    if (mesh.has_colors()) out.colors.push_back(mesh.colors[v]);
  }
  out.faces.reserve(mesh.faces.size());
  for (const auto& t : mesh.faces)
    out.faces.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
  return out;
}

}  // namespace isomer
