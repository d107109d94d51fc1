#include <cmath>
#include <stdexcept>

#include "isomer/raster.hpp"

#include "band_profile.hpp"

namespace isomer {

namespace {

// d(pixel position)/d(world vertex) rows for the orthographic projection.
struct PixelJacobian {
  Vec3 dpx, dpy;
  PixelJacobian(const OrthoView& view) {
    Mat3 rot = view.world_to_camera();
    dpx = rot.row(0) * (0.5 * view.width / view.ortho_half_extent);
    dpy = rot.row(1) * (-0.5 * view.height / view.ortho_half_extent);
  }
  Vec3 apply(const Vec2& g) const { return dpx * g.x + dpy * g.y; }
};

// dL/d(unnormalized u) given dL/d(normalize(u)).
inline Vec3 normalize_backward(const Vec3& u, const Vec3& g) {
  double n = norm(u);
  if (n < 1e-12) return {0, 0, 0};
  Vec3 nh = u / n;
  return (g - nh * dot(nh, g)) / n;
}

// Gradients of barycentric coordinates w.r.t. the three projected vertex
// positions, contracted against upstream db = (dL/db0, dL/db1, dL/db2).
void barycentric_backward(const Vec2& p, const Vec2& q0, const Vec2& q1, const Vec2& q2,
                          const Vec3& db, Vec2 g_q[3]) {
  double w0 = cross2(q1 - p, q2 - p);
  double w1 = cross2(q2 - p, q0 - p);
  double w2 = cross2(q0 - p, q1 - p);
  double area = w0 + w1 + w2;
  if (std::abs(area) < 1e-14) {
    g_q[0] = g_q[1] = g_q[2] = {0, 0};
    return;
  }
  double inv = 1.0 / area;
  double b[3] = {w0 * inv, w1 * inv, w2 * inv};

  Vec2 dA[3] = {perp(q1 - q2), perp(q2 - q0), perp(q0 - q1)};
  // dw[i][j] = d w_i / d q_j
  Vec2 zero{0, 0};
  Vec2 dw[3][3] = {{zero, perp(q2 - p), perp(q1 - p) * -1.0},
                   {perp(q2 - p) * -1.0, zero, perp(q0 - p)},
                   {perp(q1 - p), perp(q0 - p) * -1.0, zero}};
  double dbv[3] = {db.x, db.y, db.z};
  for (int j = 0; j < 3; ++j) {
    Vec2 g{0, 0};
    for (int i = 0; i < 3; ++i) {
      Vec2 term = (dw[i][j] - dA[j] * b[i]) * inv;
      g += term * dbv[i];
    }
    g_q[j] = g;
  }
}

void check_upstream_finite(const Image<double>& g) {
  for (double v : g.data)
    if (std::isnan(v)) throw std::runtime_error("NaN in upstream gradient");
}

void check_upstream_finite(const Image<Vec3>& g) {
  for (const Vec3& v : g.data)
    if (std::isnan(v.x) || std::isnan(v.y) || std::isnan(v.z))
      throw std::runtime_error("NaN in upstream gradient");
}

}  // namespace

GradientBuffer backward_mask(const TriMesh& mesh, const RenderOutput& rendered,
                             const Image<double>& dL_dmask) {
  check_upstream_finite(dL_dmask);
  GradientBuffer grad(mesh.vertices.size());
  PixelJacobian jac(rendered.view);
  const double sigma = rendered.sigma;

  for (const auto& bp : rendered.band) {
    double g = dL_dmask.at(bp.x, bp.y);
    if (g == 0.0) continue;
    const auto& seg = rendered.silhouette[bp.segment];
    Vec2 p{bp.x + 0.5, bp.y + 0.5};
    Vec2 q = seg.pa + (seg.pb - seg.pa) * bp.t;
    double dist = bp.dist;
    if (dist < 1e-9) continue;  // on the edge itself; direction undefined
    Vec2 u = (p - q) / dist;

    double x = bp.sign * dist / sigma;
    double dmask_ddist_signed = BandProfile::derivative(x) / sigma;
    double gd = g * dmask_ddist_signed * bp.sign;  // dL/d(unsigned dist)

    Vec2 ga = u * (-(1.0 - bp.t) * gd);
    Vec2 gb = u * (-bp.t * gd);
    grad.d_vertex[seg.va] += jac.apply(ga);
    grad.d_vertex[seg.vb] += jac.apply(gb);
  }
  return grad;
}

GradientBuffer backward_normal(const TriMesh& mesh, const RenderOutput& rendered,
                               const Image<Vec3>& dL_dnormal) {
  check_upstream_finite(dL_dnormal);
  GradientBuffer grad(mesh.vertices.size());
  PixelJacobian jac(rendered.view);
  const Mat3 rot_t = rendered.view.world_to_camera().transposed();

  // Accumulated dL/d(camera-frame unit vertex normal).
  std::vector<Vec3> g_cam_normal(mesh.vertices.size(), Vec3{0, 0, 0});

  for (int py = 0; py < rendered.face_id.height; ++py) {
    for (int px = 0; px < rendered.face_id.width; ++px) {
      int f = rendered.face_id.at(px, py);
      if (f < 0) continue;
      Vec3 g = dL_dnormal.at(px, py);
      if (g.x == 0 && g.y == 0 && g.z == 0) continue;

      const auto& t = mesh.faces[f];
      Vec2 p{px + 0.5, py + 0.5};
      Vec2 q0 = rendered.pixel_vertices[t[0]], q1 = rendered.pixel_vertices[t[1]],
           q2 = rendered.pixel_vertices[t[2]];
      double w0 = cross2(q1 - p, q2 - p);
      double w1 = cross2(q2 - p, q0 - p);
      double w2 = cross2(q0 - p, q1 - p);
      double area = w0 + w1 + w2;
      if (std::abs(area) < 1e-14) continue;
      double b[3] = {w0 / area, w1 / area, w2 / area};

      Vec3 m = rendered.cam_vertex_normals[t[0]] * b[0] +
               rendered.cam_vertex_normals[t[1]] * b[1] +
               rendered.cam_vertex_normals[t[2]] * b[2];
      Vec3 g_m = normalize_backward(m, g);

      Vec3 db{dot(rendered.cam_vertex_normals[t[0]], g_m),
              dot(rendered.cam_vertex_normals[t[1]], g_m),
              dot(rendered.cam_vertex_normals[t[2]], g_m)};
      Vec2 g_q[3];
      barycentric_backward(p, q0, q1, q2, db, g_q);
      for (int k = 0; k < 3; ++k) {
        grad.d_vertex[t[k]] += jac.apply(g_q[k]);
        g_cam_normal[t[k]] += g_m * b[k];
      }
    }
  }

  // Chain through the area-weighted vertex normals: world gradient, then
  // normalization, then the cross products of each incident face.
  std::vector<Vec3> normal_sum(mesh.vertices.size(), Vec3{0, 0, 0});
  for (int f = 0; f < mesh.face_count(); ++f) {
    Vec3 n = face_normal_scaled(mesh, f);
    for (int k = 0; k < 3; ++k) normal_sum[mesh.faces[f][k]] += n;
  }
  std::vector<Vec3> g_sum(mesh.vertices.size(), Vec3{0, 0, 0});
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    Vec3 g_world = rot_t * g_cam_normal[v];
    g_sum[v] = normalize_backward(normal_sum[v], g_world);
  }
  for (int f = 0; f < mesh.face_count(); ++f) {
    const auto& t = mesh.faces[f];
    Vec3 a = mesh.vertices[t[1]] - mesh.vertices[t[0]];
    Vec3 b = mesh.vertices[t[2]] - mesh.vertices[t[0]];
    for (int k = 0; k < 3; ++k) {
      const Vec3& g = g_sum[t[k]];
      if (g.x == 0 && g.y == 0 && g.z == 0) continue;
      Vec3 ga = cross(b, g);   // d(g . cross(a,b)) / da
      Vec3 gb = cross(g, a);   // d(g . cross(a,b)) / db
      grad.d_vertex[t[1]] += ga;
      grad.d_vertex[t[2]] += gb;
      grad.d_vertex[t[0]] -= ga + gb;
    }
  }
  return grad;
}

GradientBuffer backward_attribute(const TriMesh& mesh, const RenderOutput& rendered,
                                  const std::vector<Vec3>& attributes, bool normalize,
                                  const Image<Vec3>& dL_dattr) {
  check_upstream_finite(dL_dattr);
  GradientBuffer grad(mesh.vertices.size());
  PixelJacobian jac(rendered.view);

  for (int py = 0; py < rendered.face_id.height; ++py) {
    for (int px = 0; px < rendered.face_id.width; ++px) {
      int f = rendered.face_id.at(px, py);
      if (f < 0) continue;
      Vec3 g = dL_dattr.at(px, py);
      if (g.x == 0 && g.y == 0 && g.z == 0) continue;

      const auto& t = mesh.faces[f];
      Vec2 p{px + 0.5, py + 0.5};
      Vec2 q0 = rendered.pixel_vertices[t[0]], q1 = rendered.pixel_vertices[t[1]],
           q2 = rendered.pixel_vertices[t[2]];
      double w0 = cross2(q1 - p, q2 - p);
      double w1 = cross2(q2 - p, q0 - p);
      double w2 = cross2(q0 - p, q1 - p);
      double area = w0 + w1 + w2;
      if (std::abs(area) < 1e-14) continue;
      double b[3] = {w0 / area, w1 / area, w2 / area};

      Vec3 g_m = g;
      if (normalize) {
        Vec3 m = attributes[t[0]] * b[0] + attributes[t[1]] * b[1] + attributes[t[2]] * b[2];
        g_m = normalize_backward(m, g);
      }
      Vec3 db{dot(attributes[t[0]], g_m), dot(attributes[t[1]], g_m),
              dot(attributes[t[2]], g_m)};
      Vec2 g_q[3];
      barycentric_backward(p, q0, q1, q2, db, g_q);
      for (int k = 0; k < 3; ++k) grad.d_vertex[t[k]] += jac.apply(g_q[k]);
    }
  }
  return grad;
}

}  // namespace isomer
