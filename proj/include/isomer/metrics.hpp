// Geometry and image quality metrics: unit-box normalization, Chamfer
// distance, winding-number volume IoU, F-score, PSNR and SSIM, plus the
// 24-view evaluation renders.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "isomer/image.hpp"
#include "isomer/trimesh.hpp"

namespace isomer {

// Uniform scale + translation putting the tight bounding box centered in
// [-0.5, 0.5]^3 with the longest axis spanning exactly 1.
TriMesh normalize_unit_box(const TriMesh& mesh);

// Uniform area-weighted surface samples; sample i depends only on (seed, i).
std::vector<Vec3> sample_surface(const TriMesh& mesh, int samples, uint64_t seed);

// Exact nearest-neighbor queries via a uniform grid with expanding-shell
// search (equals brute force).
struct NearestGrid {
  explicit NearestGrid(std::vector<Vec3> points);
  double nearest_distance(const Vec3& query) const;

  std::vector<Vec3> points;
  Vec3 origin;
  double cell = 1.0;
  int nx = 1, ny = 1, nz = 1;
  std::vector<std::vector<int>> bins;
};

// Symmetric mean nearest-sample distance, halved:
// 0.5 * (mean_a min_b |a-b| + mean_b min_a |b-a|).
double chamfer_distance(const TriMesh& pred, const TriMesh& gt, int samples = 10000,
                        uint64_t seed = 0);

// Area-weighted-dipole-accelerated generalized winding number (exact solid
// angles near the surface).
struct WindingField {
  explicit WindingField(const TriMesh& mesh);
  double operator()(const Vec3& p) const;

  struct Node {
    Vec3 center{0, 0, 0};       // area-weighted triangle centroid
    Vec3 area_vector{0, 0, 0};  // summed oriented area
    Vec3 box_lo, box_hi;
    double radius = 0;
    int child[8] = {-1, -1, -1, -1, -1, -1, -1, -1};
    int begin = 0, end = 0;  // triangle range for leaves
    bool leaf = true;
  };
  std::vector<Node> nodes;
  std::vector<int> order;  // triangle indices grouped per leaf
  const TriMesh* mesh;

 private:
  int build(std::vector<int>& tris, int begin, int end, const Vec3& lo, const Vec3& hi,
            int depth);
  double exact(const Node& n, const Vec3& p) const;
};

// Voxelized intersection-over-union on a resolution^3 grid over
// [-0.5, 0.5]^3; inside test: winding number >= 0.5 at voxel centers.
// Non-watertight inputs produce a stderr warning, the soft test still runs.
double volume_iou(const TriMesh& a, const TriMesh& b, int resolution = 64);

// Harmonic mean of the fractions of samples within tau of the other surface.
double fscore(const TriMesh& pred, const TriMesh& gt, double tau = 0.05, int samples = 10000,
              uint64_t seed = 0);

// PSNR in dB on [0,1] images (identical images report the 99 dB cap).
double psnr(const Image<Vec3>& a, const Image<Vec3>& b);
// Mean SSIM over pixels and channels, 11x11 Gaussian window (sigma 1.5).
double ssim(const Image<Vec3>& a, const Image<Vec3>& b);

// 24 evaluation renders: azimuth_count evenly spaced azimuths at each
// elevation, vertex colors (or the position colormap) over white background.
std::vector<Image<Vec3>> render_eval_views(const TriMesh& mesh,
                                           const std::vector<double>& elevations_deg = {0, 15,
                                                                                        30},
                                           int azimuth_count = 8, int resolution = 256);

struct MetricsReport {
  std::optional<double> chamfer;
  std::optional<double> volume_iou;
  std::optional<double> fscore;
  double fscore_tau = 0.05;
  std::vector<double> psnr_per_view;
  std::optional<double> psnr_mean;
  std::vector<double> ssim_per_view;
  std::optional<double> ssim_mean;

  std::string to_json() const;
  std::string to_table() const;
};

}  // namespace isomer
