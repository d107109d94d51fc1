#include "isomer/surgery.hpp"

#include <deque>
#include <stdexcept>

#include "editable_mesh.hpp"

namespace isomer {

SurgeryResult edge_split(const TriMesh& mesh, EdgeRef edge) {
  EditableMesh em(mesh);
  bool ok = em.split(edge.a, edge.b) >= 0;
  return {ok ? em.to_trimesh() : mesh, ok};
}

SurgeryResult edge_collapse(const TriMesh& mesh, EdgeRef edge) {
  EditableMesh em(mesh);
  Vec3 mid = (mesh.vertices[edge.a] + mesh.vertices[edge.b]) * 0.5;
  bool ok = em.collapse(edge.a, edge.b, mid);
  return {ok ? em.to_trimesh() : mesh, ok};
}

SurgeryResult edge_flip(const TriMesh& mesh, EdgeRef edge) {
  EditableMesh em(mesh);
  bool ok = em.flip(edge.a, edge.b);
  return {ok ? em.to_trimesh() : mesh, ok};
}

namespace {

struct EdgePair {
  int a, b;
};

std::vector<EdgePair> live_edges(const EditableMesh& em) {
  std::vector<EdgePair> edges;
  edges.reserve(em.live_faces * 3 / 2);
  for (const auto& t : em.faces) {
    if (t[0] < 0) continue;
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      if (a < b) edges.push_back({a, b});
    }
  }
  return edges;
}

int valence_target(const EditableMesh& em, int v) { return em.is_boundary_vertex(v) ? 4 : 6; }

}  // namespace

TriMesh remesh_pass(const TriMesh& mesh, double target_edge_length) {
  if (!(target_edge_length > 0.0)) throw std::runtime_error("target edge length must be positive");
  EditableMesh em(mesh);
  const double split_len = target_edge_length * 4.0 / 3.0;
  const double collapse_len = target_edge_length * 4.0 / 5.0;

  // Split pass over the current edges. Only the two halves of a split edge
  // re-enter the queue (they keep halving, so this terminates); fresh spoke
  // edges are picked up by the next pass.
  {
    std::deque<EdgePair> queue;
    for (const auto& e : live_edges(em)) queue.push_back(e);
    while (!queue.empty()) {
      EdgePair e = queue.front();
      queue.pop_front();
      if (!em.edge_exists(e.a, e.b)) continue;
      if (norm(em.vertices[e.a] - em.vertices[e.b]) <= split_len) continue;
      int m = em.split(e.a, e.b);
      if (m < 0) continue;
      queue.push_back({e.a, m});
      queue.push_back({m, e.b});
    }
  }

  // Collapse short edges; skip any collapse that would itself create an
  // over-long edge, which would just re-trigger splitting.
  {
    EditableMesh::CollapseOptions opt;
    opt.check_normal_flip = true;
    opt.max_result_edge = split_len;
    for (const auto& e : live_edges(em)) {
      if (e.a >= int(em.vertices.size()) || e.b >= int(em.vertices.size())) continue;
      if (!em.edge_exists(e.a, e.b)) continue;
      if (norm(em.vertices[e.a] - em.vertices[e.b]) >= collapse_len) continue;
      Vec3 mid = (em.vertices[e.a] + em.vertices[e.b]) * 0.5;
      em.collapse(e.a, e.b, mid, opt);
    }
  }

  // Valence-regularizing flips.
  for (const auto& e : live_edges(em)) {
    std::vector<int> fs = em.edge_faces(e.a, e.b);
    if (fs.size() != 2) continue;
    int c = em.opposite_vertex(fs[0], e.a, e.b);
    int d = em.opposite_vertex(fs[1], e.a, e.b);
    if (c < 0 || d < 0 || c == d) continue;
    auto dev = [&](int v, int delta) {
      return std::abs(em.valence(v) + delta - valence_target(em, v));
    };
    int before = dev(e.a, 0) + dev(e.b, 0) + dev(c, 0) + dev(d, 0);
    int after = dev(e.a, -1) + dev(e.b, -1) + dev(c, 1) + dev(d, 1);
    if (after < before) em.flip(e.a, e.b);
  }

  return em.to_trimesh();
}

}  // namespace isomer
