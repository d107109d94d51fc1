#include "isomer/simplify.hpp"

#include <cmath>
#include <queue>
#include <stdexcept>

#include "editable_mesh.hpp"

namespace isomer {

namespace {

// Symmetric 4x4 quadric: cost(v) = v'Av + 2 b'v + c.
struct Quadric {
  double a00 = 0, a01 = 0, a02 = 0, a11 = 0, a12 = 0, a22 = 0;
  double b0 = 0, b1 = 0, b2 = 0;
  double c = 0;

  void add_plane(const Vec3& n, double d, double w) {
    a00 += w * n.x * n.x; a01 += w * n.x * n.y; a02 += w * n.x * n.z;
    a11 += w * n.y * n.y; a12 += w * n.y * n.z; a22 += w * n.z * n.z;
    b0 += w * d * n.x; b1 += w * d * n.y; b2 += w * d * n.z;
    c += w * d * d;
  }

  Quadric& operator+=(const Quadric& o) {
    a00 += o.a00; a01 += o.a01; a02 += o.a02; a11 += o.a11; a12 += o.a12; a22 += o.a22;
    b0 += o.b0; b1 += o.b1; b2 += o.b2; c += o.c;
    return *this;
  }

  double cost(const Vec3& v) const {
    double qx = a00 * v.x + a01 * v.y + a02 * v.z + b0;
    double qy = a01 * v.x + a11 * v.y + a12 * v.z + b1;
    double qz = a02 * v.x + a12 * v.y + a22 * v.z + b2;
    return v.x * qx + v.y * qy + v.z * qz + b0 * v.x + b1 * v.y + b2 * v.z + c;
  }

  // Minimizer of the quadric (solves A x = -b); false when near-singular.
  bool optimal(Vec3& out) const {
    double det = a00 * (a11 * a22 - a12 * a12) - a01 * (a01 * a22 - a12 * a02) +
                 a02 * (a01 * a12 - a11 * a02);
    double scale = std::abs(a00) + std::abs(a11) + std::abs(a22);
    if (std::abs(det) <= 1e-12 * scale * scale * scale || scale == 0.0) return false;
    double inv = 1.0 / det;
    double rx = -b0, ry = -b1, rz = -b2;
    out.x = inv * (rx * (a11 * a22 - a12 * a12) - a01 * (ry * a22 - a12 * rz) +
                   a02 * (ry * a12 - a11 * rz));
    out.y = inv * (a00 * (ry * a22 - a12 * rz) - rx * (a01 * a22 - a12 * a02) +
                   a02 * (a01 * rz - ry * a02));
    out.z = inv * (a00 * (a11 * rz - ry * a12) - a01 * (a01 * rz - ry * a02) +
                   rx * (a01 * a12 - a11 * a02));
    return is_finite(out);
  }
};

struct HeapEntry {
  double cost;
  int a, b;
  uint64_t version;  // combined endpoint versions at push time
  bool operator>(const HeapEntry& o) const { return cost > o.cost; }
};

}  // namespace

SimplifyResult qem_simplify(const TriMesh& mesh, int target_faces) {
  if (target_faces < 4) throw std::runtime_error("target face count must be >= 4");
  if (mesh.face_count() <= target_faces) return {mesh, true};

  EditableMesh em(mesh);
  std::vector<Quadric> quadrics(em.vertices.size());

  for (int f = 0; f < int(em.faces.size()); ++f) {
    const auto& t = em.faces[f];
    Vec3 scaled = em.face_normal_scaled(f);
    double area2 = norm(scaled);
    if (area2 < 1e-300) continue;
    Vec3 n = scaled / area2;
    double d = -dot(n, em.vertices[t[0]]);
    for (int k = 0; k < 3; ++k) quadrics[t[k]].add_plane(n, d, 0.5 * area2);
    // Boundary edges get a perpendicular constraint plane so open rims keep
    // their shape while interior collapses proceed.
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      if (em.edge_faces(a, b).size() != 1) continue;
      Vec3 e = em.vertices[b] - em.vertices[a];
      Vec3 bn = cross(e, n);
      double len = norm(bn);
      if (len < 1e-300) continue;
      bn = bn / len;
      double bd = -dot(bn, em.vertices[a]);
      double w = norm2(e);
      quadrics[a].add_plane(bn, bd, w);
      quadrics[b].add_plane(bn, bd, w);
    }
  }

  std::vector<uint32_t> version(em.vertices.size(), 0);
  auto pair_version = [&](int a, int b) {
    return (uint64_t(version[a]) << 32) | version[b];
  };

  auto best_placement = [&](int a, int b, Vec3& pos) {
    Quadric q = quadrics[a];
    q += quadrics[b];
    Vec3 opt;
    Vec3 mid = (em.vertices[a] + em.vertices[b]) * 0.5;
    double best = q.cost(mid);
    pos = mid;
    for (const Vec3& cand : {em.vertices[a], em.vertices[b]}) {
      double c = q.cost(cand);
      if (c < best) { best = c; pos = cand; }
    }
    if (q.optimal(opt)) {
      double c = q.cost(opt);
      if (c < best) { best = c; pos = opt; }
    }
    return best;
  };

  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<HeapEntry>> heap;
  auto push_edge = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    Vec3 pos;
    double cost = best_placement(a, b, pos);
    heap.push({cost, a, b, pair_version(a, b)});
  };

  auto push_all_edges = [&] {
    std::unordered_map<uint64_t, bool> seen;
    for (const auto& t : em.faces) {
      if (t[0] < 0) continue;
      for (int k = 0; k < 3; ++k) {
        int a = t[k], b = t[(k + 1) % 3];
        uint64_t key = edge_key(a, b);
        if (!seen[key]) {
          seen[key] = true;
          push_edge(a, b);
        }
      }
    }
  };

  // An edge popped while illegal may become legal after nearby collapses, so
  // exhausting the heap once is not final: rebuild and retry until a full
  // round makes no progress.
  EditableMesh::CollapseOptions opt;
  opt.check_normal_flip = true;
  while (em.live_faces > target_faces) {
    heap = {};
    push_all_edges();
    int collapsed = 0;
    while (em.live_faces > target_faces && !heap.empty()) {
      HeapEntry e = heap.top();
      heap.pop();
      if (e.version != pair_version(e.a, e.b)) continue;
      if (!em.edge_exists(e.a, e.b)) continue;
      Vec3 pos;
      best_placement(e.a, e.b, pos);
      if (!em.collapse(e.a, e.b, pos, opt)) continue;
      quadrics[e.a] += quadrics[e.b];
      version[e.a]++;
      version[e.b]++;
      collapsed++;
      for (int v : em.neighbors(e.a)) push_edge(e.a, v);
    }
    if (collapsed == 0) break;
  }

  return {em.to_trimesh(), em.live_faces <= target_faces};
}

}  // namespace isomer
