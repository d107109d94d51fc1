#include "isomer/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "isomer/parallel.hpp"
#include "isomer/raster.hpp"
#include "isomer/rng.hpp"
#include "isomer/views.hpp"

namespace isomer {

TriMesh normalize_unit_box(const TriMesh& mesh) {
  if (mesh.vertices.empty()) throw std::runtime_error("zero-extent mesh");
  Bounds3 b = bounds(mesh);
  Vec3 ext = b.extent();
  double longest = std::max({ext.x, ext.y, ext.z});
  if (longest <= 0) throw std::runtime_error("zero-extent mesh");
  Vec3 center = b.center();
  double scale = 1.0 / longest;
  TriMesh out = mesh;
  for (auto& v : out.vertices) v = (v - center) * scale;
  return out;
}

std::vector<Vec3> sample_surface(const TriMesh& mesh, int samples, uint64_t seed) {
  if (samples < 1) throw std::runtime_error("sample count must be >= 1");
  if (mesh.faces.empty()) throw std::runtime_error("cannot sample an empty mesh");
  std::vector<double> cumulative(mesh.faces.size());
  double total = 0;
  for (int f = 0; f < mesh.face_count(); ++f) {
    total += 0.5 * norm(face_normal_scaled(mesh, f));
    cumulative[f] = total;
  }
  if (total <= 0) throw std::runtime_error("cannot sample a zero-area mesh");

  std::vector<Vec3> points(samples);
  const int block = 4096;
  parallel_blocks((samples + block - 1) / block, [&](int bi) {
    for (int i = bi * block; i < std::min(samples, (bi + 1) * block); ++i) {
      double u = hash_uniform(seed, uint64_t(i), 0) * total;
      int f = int(std::lower_bound(cumulative.begin(), cumulative.end(), u) -
                  cumulative.begin());
      f = std::min(f, mesh.face_count() - 1);
      double r1 = hash_uniform(seed, uint64_t(i), 1);
      double r2 = hash_uniform(seed, uint64_t(i), 2);
      double s = std::sqrt(r1);
      double b0 = 1.0 - s, b1 = s * (1.0 - r2), b2 = s * r2;
      const auto& t = mesh.faces[f];
      points[i] = mesh.vertices[t[0]] * b0 + mesh.vertices[t[1]] * b1 +
                  mesh.vertices[t[2]] * b2;
    }
  });
  return points;
}

NearestGrid::NearestGrid(std::vector<Vec3> pts) : points(std::move(pts)) {
  Bounds3 b;
  for (const auto& p : points) b.expand(p);
  origin = b.lo;
  Vec3 ext = b.extent();
  double longest = std::max({ext.x, ext.y, ext.z, 1e-12});
  int target = std::max(1, int(std::cbrt(double(points.size()))));
  cell = longest / target;
  nx = std::max(1, int(std::floor(ext.x / cell)) + 1);
  ny = std::max(1, int(std::floor(ext.y / cell)) + 1);
  nz = std::max(1, int(std::floor(ext.z / cell)) + 1);
  bins.assign(size_t(nx) * ny * nz, {});
  for (int i = 0; i < int(points.size()); ++i) {
    Vec3 d = points[i] - origin;
    int cx = std::clamp(int(d.x / cell), 0, nx - 1);
    int cy = std::clamp(int(d.y / cell), 0, ny - 1);
    int cz = std::clamp(int(d.z / cell), 0, nz - 1);
    bins[(size_t(cz) * ny + cy) * nx + cx].push_back(i);
  }
}

double NearestGrid::nearest_distance(const Vec3& query) const {
  Vec3 d = query - origin;
  int cx = std::clamp(int(std::floor(d.x / cell)), 0, nx - 1);
  int cy = std::clamp(int(std::floor(d.y / cell)), 0, ny - 1);
  int cz = std::clamp(int(std::floor(d.z / cell)), 0, nz - 1);
  double best = 1e300;
  int max_shell = std::max({nx, ny, nz});
  for (int r = 0; r <= max_shell; ++r) {
    // Cells with Chebyshev distance >= r+1 hold points at least r*cell away
    // (the query may sit anywhere inside, or outside, its clamped cell).
    if (r > 0 && best <= double(r - 1) * cell) break;
    bool any = false;
    for (int z = std::max(0, cz - r); z <= std::min(nz - 1, cz + r); ++z) {
      for (int y = std::max(0, cy - r); y <= std::min(ny - 1, cy + r); ++y) {
        for (int x = std::max(0, cx - r); x <= std::min(nx - 1, cx + r); ++x) {
          int shell = std::max({std::abs(x - cx), std::abs(y - cy), std::abs(z - cz)});
          if (shell != r) continue;
          any = true;
          for (int i : bins[(size_t(z) * ny + y) * nx + x]) {
            double dist = norm(points[i] - query);
            if (dist < best) best = dist;
          }
        }
      }
    }
    if (!any && r >= max_shell) break;
  }
  return best;
}

namespace {

// Content fingerprint so each mesh gets the same sample stream regardless of
// argument order (keeps the metric exactly symmetric); identical meshes get
// distinct streams so self-distance stays a small positive sampling floor.
uint64_t mesh_fingerprint(const TriMesh& mesh) {
  uint64_t h = splitmix64(uint64_t(mesh.vertex_count()) * 31 + mesh.face_count());
  for (int v = 0; v < mesh.vertex_count(); v += std::max(1, mesh.vertex_count() / 64)) {
    uint64_t bits;
    double s = mesh.vertices[v].x + 3.0 * mesh.vertices[v].y + 7.0 * mesh.vertices[v].z;
    std::memcpy(&bits, &s, sizeof bits);
    h = hash_combine(h, bits);
  }
  return h;
}

std::pair<uint64_t, uint64_t> sampling_seeds(const TriMesh& a, const TriMesh& b,
                                             uint64_t seed) {
  uint64_t sa = hash_combine(seed, mesh_fingerprint(a));
  uint64_t sb = hash_combine(seed, mesh_fingerprint(b));
  if (sa == sb) sb = hash_combine(sb, 1);
  return {sa, sb};
}

}  // namespace

double chamfer_distance(const TriMesh& pred, const TriMesh& gt, int samples, uint64_t seed) {
  auto [sa, sb] = sampling_seeds(pred, gt, seed);
  std::vector<Vec3> a = sample_surface(pred, samples, sa);
  std::vector<Vec3> b = sample_surface(gt, samples, sb);
  NearestGrid ga(a), gb(b);

  auto mean_nearest = [&](const std::vector<Vec3>& from, const NearestGrid& to) {
    std::vector<double> dist(from.size());
    const int block = 2048;
    parallel_blocks(int((from.size() + block - 1) / block), [&](int bi) {
      size_t lo = size_t(bi) * block, hi = std::min(from.size(), lo + block);
      for (size_t i = lo; i < hi; ++i) dist[i] = to.nearest_distance(from[i]);
    });
    double sum = 0;
    for (double v : dist) sum += v;
    return sum / double(from.size());
  };
  return 0.5 * (mean_nearest(a, gb) + mean_nearest(b, ga));
}

// --- winding numbers ---------------------------------------------------

WindingField::WindingField(const TriMesh& m) : mesh(&m) {
  std::vector<int> tris(m.face_count());
  for (int i = 0; i < m.face_count(); ++i) tris[i] = i;
  Bounds3 b = bounds(m);
  order.reserve(tris.size());
  if (!tris.empty()) build(tris, 0, int(tris.size()), b.lo, b.hi, 0);
}

int WindingField::build(std::vector<int>& tris, int begin, int end, const Vec3& lo,
                        const Vec3& hi, int depth) {
  int id = int(nodes.size());
  nodes.push_back({});
  Node node;
  node.box_lo = lo;
  node.box_hi = hi;

  double total_area = 0;
  for (int i = begin; i < end; ++i) {
    const auto& t = mesh->faces[tris[i]];
    Vec3 scaled = cross(mesh->vertices[t[1]] - mesh->vertices[t[0]],
                        mesh->vertices[t[2]] - mesh->vertices[t[0]]);
    double area = 0.5 * norm(scaled);
    Vec3 centroid = (mesh->vertices[t[0]] + mesh->vertices[t[1]] + mesh->vertices[t[2]]) / 3.0;
    node.area_vector += scaled * 0.5;
    node.center += centroid * area;
    total_area += area;
  }
  node.center = total_area > 0 ? node.center / total_area : (lo + hi) * 0.5;
  double r2 = 0;
  for (int i = begin; i < end; ++i) {
    const auto& t = mesh->faces[tris[i]];
    for (int k = 0; k < 3; ++k) r2 = std::max(r2, norm2(mesh->vertices[t[k]] - node.center));
  }
  node.radius = std::sqrt(r2);

  const int leaf_size = 24;
  if (end - begin <= leaf_size || depth >= 20) {
    node.leaf = true;
    node.begin = int(order.size());
    for (int i = begin; i < end; ++i) order.push_back(tris[i]);
    node.end = int(order.size());
    nodes[id] = node;
    return id;
  }

  node.leaf = false;
  Vec3 mid = (lo + hi) * 0.5;
  std::array<std::vector<int>, 8> parts;
  for (int i = begin; i < end; ++i) {
    const auto& t = mesh->faces[tris[i]];
    Vec3 c = (mesh->vertices[t[0]] + mesh->vertices[t[1]] + mesh->vertices[t[2]]) / 3.0;
    int oct = (c.x > mid.x) | ((c.y > mid.y) << 1) | ((c.z > mid.z) << 2);
    parts[oct].push_back(tris[i]);
  }
  for (int oct = 0; oct < 8; ++oct) {
    if (parts[oct].empty()) continue;
    Vec3 clo{oct & 1 ? mid.x : lo.x, oct & 2 ? mid.y : lo.y, oct & 4 ? mid.z : lo.z};
    Vec3 chi{oct & 1 ? hi.x : mid.x, oct & 2 ? hi.y : mid.y, oct & 4 ? hi.z : mid.z};
    int child = build(parts[oct], 0, int(parts[oct].size()), clo, chi, depth + 1);
    node.child[oct] = child;
  }
  nodes[id] = node;
  return id;
}

namespace {

// Van Oosterom & Strackee solid angle of a triangle seen from the origin.
double solid_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  double la = norm(a), lb = norm(b), lc = norm(c);
  double numerator = dot(a, cross(b, c));
  double denominator = la * lb * lc + dot(a, b) * lc + dot(b, c) * la + dot(c, a) * lb;
  return 2.0 * std::atan2(numerator, denominator);
}

}  // namespace

double WindingField::exact(const Node& n, const Vec3& p) const {
  double sum = 0;
  for (int i = n.begin; i < n.end; ++i) {
    const auto& t = mesh->faces[order[i]];
    sum += solid_angle(mesh->vertices[t[0]] - p, mesh->vertices[t[1]] - p,
                       mesh->vertices[t[2]] - p);
  }
  return sum;
}

double WindingField::operator()(const Vec3& p) const {
  if (nodes.empty()) return 0.0;
  const double beta = 2.0;
  double sum = 0;
  // Explicit stack traversal.
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& n = nodes[stack[--top]];
    Vec3 d = p - n.center;
    double dist2 = norm2(d);
    if (!n.leaf && dist2 > beta * beta * n.radius * n.radius) {
      // Far-field dipole of the oriented area.
      double dist = std::sqrt(dist2);
      sum += dot(n.area_vector, d * -1.0) / (dist2 * dist);
      continue;
    }
    if (n.leaf) {
      sum += exact(n, p);
      continue;
    }
    for (int c : n.child)
      if (c >= 0) stack[top++] = c;
  }
  return sum / (4.0 * kPi);
}

double volume_iou(const TriMesh& a, const TriMesh& b, int resolution) {
  if (resolution < 16) throw std::runtime_error("volume grid resolution must be >= 16");
  if (!is_closed_manifold(a) || !is_closed_manifold(b))
    std::cerr << "warning: volume_iou input is not watertight; "
                 "winding-number test applied anyway\n";
  WindingField wa(a), wb(b);

  std::vector<long> both(resolution, 0), either(resolution, 0);
  parallel_blocks(resolution, [&](int zi) {
    double z = -0.5 + (zi + 0.5) / resolution;
    long n_both = 0, n_either = 0;
    for (int yi = 0; yi < resolution; ++yi) {
      double y = -0.5 + (yi + 0.5) / resolution;
      for (int xi = 0; xi < resolution; ++xi) {
        double x = -0.5 + (xi + 0.5) / resolution;
        bool in_a = wa({x, y, z}) >= 0.5;
        bool in_b = wb({x, y, z}) >= 0.5;
        n_both += in_a && in_b;
        n_either += in_a || in_b;
      }
    }
    both[zi] = n_both;
    either[zi] = n_either;
  });
  long intersection = 0, uni = 0;
  for (int zi = 0; zi < resolution; ++zi) {
    intersection += both[zi];
    uni += either[zi];
  }
  return uni == 0 ? 0.0 : double(intersection) / double(uni);
}

double fscore(const TriMesh& pred, const TriMesh& gt, double tau, int samples, uint64_t seed) {
  if (!(tau > 0)) throw std::runtime_error("fscore threshold must be positive");
  auto [sa, sb] = sampling_seeds(pred, gt, seed);
  std::vector<Vec3> a = sample_surface(pred, samples, sa);
  std::vector<Vec3> b = sample_surface(gt, samples, sb);
  NearestGrid ga(a), gb(b);

  auto fraction_within = [&](const std::vector<Vec3>& from, const NearestGrid& to) {
    long n = 0;
    for (const auto& p : from) n += to.nearest_distance(p) <= tau;
    return double(n) / double(from.size());
  };
  double precision = fraction_within(a, gb);
  double recall = fraction_within(b, ga);
  if (precision + recall <= 0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

// --- image metrics ------------------------------------------------------

double psnr(const Image<Vec3>& a, const Image<Vec3>& b) {
  if (a.width != b.width || a.height != b.height)
    throw std::runtime_error("image size mismatch");
  double se = 0;
  for (size_t i = 0; i < a.pixel_count(); ++i) se += norm2(a.data[i] - b.data[i]);
  double mse = se / (3.0 * double(a.pixel_count()));
  if (mse < 1e-12) return 99.0;
  return std::min(99.0, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Image<Vec3>& a, const Image<Vec3>& b) {
  if (a.width != b.width || a.height != b.height)
    throw std::runtime_error("image size mismatch");
  const int radius = 5;  // 11x11 window
  double kernel[11];
  double ksum = 0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * (i * i) / (1.5 * 1.5));
    ksum += kernel[i + radius];
  }
  for (double& k : kernel) k /= ksum;
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;

  double total = 0;
  long count = 0;
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      for (int ch = 0; ch < 3; ++ch) {
        double w_sum = 0, mu_a = 0, mu_b = 0, aa = 0, bb = 0, ab = 0;
        for (int dy = -radius; dy <= radius; ++dy) {
          int yy = y + dy;
          if (yy < 0 || yy >= a.height) continue;
          for (int dx = -radius; dx <= radius; ++dx) {
            int xx = x + dx;
            if (xx < 0 || xx >= a.width) continue;
            double w = kernel[dy + radius] * kernel[dx + radius];
            double va = a.at(xx, yy)[ch], vb = b.at(xx, yy)[ch];
            w_sum += w;
            mu_a += w * va;
            mu_b += w * vb;
            aa += w * va * va;
            bb += w * vb * vb;
            ab += w * va * vb;
          }
        }
        mu_a /= w_sum;
        mu_b /= w_sum;
        double var_a = std::max(0.0, aa / w_sum - mu_a * mu_a);
        double var_b = std::max(0.0, bb / w_sum - mu_b * mu_b);
        double cov = ab / w_sum - mu_a * mu_b;
        double s = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
                   ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
        total += s;
        count++;
      }
    }
  }
  return total / double(count);
}

std::vector<Image<Vec3>> render_eval_views(const TriMesh& mesh,
                                           const std::vector<double>& elevations_deg,
                                           int azimuth_count, int resolution) {
  std::vector<Image<Vec3>> out;
  RasterSettings settings;
  settings.normals = false;
  settings.colors = true;
  settings.sigma = 0.0;
  for (double elev : elevations_deg) {
    for (int k = 0; k < azimuth_count; ++k) {
      OrthoView view{deg_to_rad(360.0 * k / azimuth_count), deg_to_rad(elev), 0.55, resolution,
                     resolution};
      out.push_back(rasterize(mesh, view, settings).color_image);
    }
  }
  return out;
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  if (chamfer) j["chamfer"] = *chamfer;
  if (volume_iou) j["volume_iou"] = *volume_iou;
  if (fscore) {
    j["fscore"] = *fscore;
    j["fscore_tau"] = fscore_tau;
  }
  if (psnr_mean) {
    j["psnr_mean"] = *psnr_mean;
    j["psnr_per_view"] = psnr_per_view;
  }
  if (ssim_mean) {
    j["ssim_mean"] = *ssim_mean;
    j["ssim_per_view"] = ssim_per_view;
  }
  return j.dump(2);
}

std::string MetricsReport::to_table() const {
  std::ostringstream out;
  auto row = [&](const char* name, double value) {
    out << name;
    for (size_t i = std::strlen(name); i < 14; ++i) out << ' ';
    out << value << '\n';
  };
  if (chamfer) row("chamfer", *chamfer);
  if (volume_iou) row("volume_iou", *volume_iou);
  if (fscore) row("fscore", *fscore);
  if (psnr_mean) row("psnr_mean", *psnr_mean);
  if (ssim_mean) row("ssim_mean", *ssim_mean);
  return out.str();
}

}  // namespace isomer
