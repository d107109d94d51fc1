// Internal mutable mesh used by the surgery and simplification passes.
// Faces are tombstoned ([0] == -1) and vertex->face incidence is kept
// current, so legality checks and local edits stay O(ring size).
#pragma once

#include <algorithm>
#include <array>
#include <vector>

#include "isomer/trimesh.hpp"

namespace isomer {

class EditableMesh {
 public:
  std::vector<Vec3> vertices;
  std::vector<Vec3> colors;  // empty or parallel to vertices
  std::vector<std::array<int, 3>> faces;
  std::vector<std::vector<int>> vfaces;
  int live_faces = 0;

  explicit EditableMesh(const TriMesh& mesh) {
    vertices = mesh.vertices;
    colors = mesh.colors;
    faces = mesh.faces;
    vfaces.resize(vertices.size());
    for (int f = 0; f < int(faces.size()); ++f)
      for (int k = 0; k < 3; ++k) vfaces[faces[f][k]].push_back(f);
    live_faces = int(faces.size());
  }

  bool face_alive(int f) const { return faces[f][0] >= 0; }

  bool has_colors() const { return !colors.empty(); }

  Vec3 face_normal_scaled(int f) const {
    const auto& t = faces[f];
    return cross(vertices[t[1]] - vertices[t[0]], vertices[t[2]] - vertices[t[0]]);
  }

  // Live faces containing both a and b.
  std::vector<int> edge_faces(int a, int b) const {
    std::vector<int> out;
    for (int f : vfaces[a]) {
      const auto& t = faces[f];
      if (t[0] == b || t[1] == b || t[2] == b) out.push_back(f);
    }
    return out;
  }

  bool edge_exists(int a, int b) const {
    for (int f : vfaces[a]) {
      const auto& t = faces[f];
      if (t[0] == b || t[1] == b || t[2] == b) return true;
    }
    return false;
  }

  int valence(int v) const {
    std::vector<int> nb = neighbors(v);
    return int(nb.size());
  }

  std::vector<int> neighbors(int v) const {
    std::vector<int> nb;
    for (int f : vfaces[v]) {
      const auto& t = faces[f];
      for (int k = 0; k < 3; ++k)
        if (t[k] != v) nb.push_back(t[k]);
    }
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    return nb;
  }

  bool is_boundary_vertex(int v) const {
    // Any incident edge with a single incident face.
    for (int f : vfaces[v]) {
      const auto& t = faces[f];
      for (int k = 0; k < 3; ++k) {
        int a = t[k], b = t[(k + 1) % 3];
        if (a != v && b != v) continue;
        if (edge_faces(a, b).size() == 1) return true;
      }
    }
    return false;
  }

  // Third vertex of face f relative to edge (a, b).
  int opposite_vertex(int f, int a, int b) const {
    for (int k = 0; k < 3; ++k) {
      int v = faces[f][k];
      if (v != a && v != b) return v;
    }
    return -1;
  }

  void remove_face(int f) {
    for (int k = 0; k < 3; ++k) {
      auto& list = vfaces[faces[f][k]];
      list.erase(std::remove(list.begin(), list.end(), f), list.end());
    }
    faces[f] = {-1, -1, -1};
    live_faces--;
  }

  int add_face(int a, int b, int c) {
    int f = int(faces.size());
    faces.push_back({a, b, c});
    vfaces[a].push_back(f);
    vfaces[b].push_back(f);
    vfaces[c].push_back(f);
    live_faces++;
    return f;
  }

  int add_vertex(const Vec3& p, const Vec3& color = {0, 0, 0}) {
    int v = int(vertices.size());
    vertices.push_back(p);
    if (has_colors()) colors.push_back(color);
    vfaces.emplace_back();
    return v;
  }

  // Split edge (a, b) at its midpoint. Returns the new vertex id, or -1 when
  // (a, b) is not a live manifold edge.
  int split(int a, int b) {
    std::vector<int> fs = edge_faces(a, b);
    if (fs.empty() || fs.size() > 2) return -1;
    Vec3 mid = (vertices[a] + vertices[b]) * 0.5;
    Vec3 mid_color = has_colors() ? (colors[a] + colors[b]) * 0.5 : Vec3{0, 0, 0};
    int m = add_vertex(mid, mid_color);
    for (int f : fs) {
      std::array<int, 3> t = faces[f];
      int i = 0;
      while (!((t[i] == a && t[(i + 1) % 3] == b) || (t[i] == b && t[(i + 1) % 3] == a))) ++i;
      int va = t[i], vb = t[(i + 1) % 3], vc = t[(i + 2) % 3];
      remove_face(f);
      add_face(va, m, vc);
      add_face(m, vb, vc);
    }
    return m;
  }

  struct CollapseOptions {
    bool check_normal_flip = false;
    double max_result_edge = 0.0;  // >0: reject if a surviving edge would exceed this
  };

  bool collapse_legal(int a, int b) const {
    if (a == b) return false;
    std::vector<int> fs = edge_faces(a, b);
    if (fs.empty() || fs.size() > 2) return false;
    std::vector<int> opp;
    for (int f : fs) opp.push_back(opposite_vertex(f, a, b));
    std::sort(opp.begin(), opp.end());

    // Link condition: shared neighbors must be exactly the opposite vertices.
    std::vector<int> na = neighbors(a), nb = neighbors(b), shared;
    std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(shared));
    if (shared != opp) return false;

    if (fs.size() == 2) {
      // Pinch guard for interior edges between two boundary vertices.
      if (is_boundary_vertex(a) && is_boundary_vertex(b)) return false;
      // Tetrahedron guard: faces (a,c,d) and (b,c,d) both present would
      // duplicate after merging b into a.
      int c = opp[0], d = opp[1];
      bool face_acd = false, face_bcd = false;
      for (int f : vfaces[c]) {
        const auto& t = faces[f];
        bool has_d = (t[0] == d || t[1] == d || t[2] == d);
        if (!has_d || std::find(fs.begin(), fs.end(), f) != fs.end()) continue;
        if (t[0] == a || t[1] == a || t[2] == a) face_acd = true;
        if (t[0] == b || t[1] == b || t[2] == b) face_bcd = true;
      }
      if (face_acd && face_bcd) return false;
    }

    // The merged vertex and each opposite vertex must keep at least one face.
    size_t merged_faces = vfaces[a].size() + vfaces[b].size() - 2 * fs.size();
    if (merged_faces == 0) return false;
    for (int v : opp) {
      size_t remaining = vfaces[v].size();
      for (int f : fs)
        if (std::find(vfaces[v].begin(), vfaces[v].end(), f) != vfaces[v].end()) remaining--;
      if (remaining == 0) return false;
    }
    return true;
  }

  // Collapse edge (a, b), merging b into a placed at `pos`. Returns false
  // (mesh untouched) when illegal or rejected by the options.
  bool collapse(int a, int b, const Vec3& pos) { return collapse(a, b, pos, CollapseOptions{}); }

  bool collapse(int a, int b, const Vec3& pos, const CollapseOptions& opt) {
    if (!collapse_legal(a, b)) return false;
    std::vector<int> fs = edge_faces(a, b);

    if (opt.max_result_edge > 0.0) {
      double limit2 = opt.max_result_edge * opt.max_result_edge;
      for (int v : neighbors(a))
        if (v != b && norm2(vertices[v] - pos) > limit2) return false;
      for (int v : neighbors(b))
        if (v != a && norm2(vertices[v] - pos) > limit2) return false;
    }
    if (opt.check_normal_flip) {
      for (int endpoint : {a, b}) {
        for (int f : vfaces[endpoint]) {
          if (std::find(fs.begin(), fs.end(), f) != fs.end()) continue;
          std::array<int, 3> t = faces[f];
          Vec3 before = cross(vertices[t[1]] - vertices[t[0]], vertices[t[2]] - vertices[t[0]]);
          Vec3 p[3];
          for (int k = 0; k < 3; ++k) p[k] = (t[k] == a || t[k] == b) ? pos : vertices[t[k]];
          Vec3 after = cross(p[1] - p[0], p[2] - p[0]);
          if (dot(before, after) <= 0.0) return false;
        }
      }
    }

    for (int f : fs) remove_face(f);
    vertices[a] = pos;
    if (has_colors()) colors[a] = (colors[a] + colors[b]) * 0.5;
    std::vector<int> bfaces = vfaces[b];
    for (int f : bfaces) {
      for (int k = 0; k < 3; ++k)
        if (faces[f][k] == b) faces[f][k] = a;
      vfaces[a].push_back(f);
    }
    vfaces[b].clear();
    return true;
  }

  // Flip interior edge (a, b). Returns false when illegal.
  bool flip(int a, int b) {
    std::vector<int> fs = edge_faces(a, b);
    if (fs.size() != 2) return false;
    int f0 = fs[0], f1 = fs[1];
    // Orient so f0 holds the directed edge a->b.
    {
      const auto& t = faces[f0];
      bool fwd = false;
      for (int k = 0; k < 3; ++k)
        if (t[k] == a && t[(k + 1) % 3] == b) fwd = true;
      if (!fwd) std::swap(f0, f1);
    }
    int c = opposite_vertex(f0, a, b);
    int d = opposite_vertex(f1, a, b);
    if (c < 0 || d < 0 || c == d) return false;
    if (edge_exists(c, d)) return false;

    // Reject flips that would create a degenerate or folded pair.
    Vec3 n0 = cross(vertices[d] - vertices[a], vertices[c] - vertices[a]);
    Vec3 n1 = cross(vertices[b] - vertices[d], vertices[c] - vertices[d]);
    Vec3 old_dir = face_normal_scaled(f0) + face_normal_scaled(f1);
    if (norm(n0) < 1e-14 || norm(n1) < 1e-14) return false;
    if (dot(n0, old_dir) <= 0.0 || dot(n1, old_dir) <= 0.0) return false;

    remove_face(f0);
    remove_face(f1);
    add_face(a, d, c);
    add_face(d, b, c);
    return true;
  }

  TriMesh to_trimesh() const {
    TriMesh out;
    out.vertices = vertices;
    out.colors = colors;
    out.faces.reserve(live_faces);
    for (const auto& t : faces)
      if (t[0] >= 0) out.faces.push_back(t);
    return compact(out);
  }
};

}  // namespace isomer
