#include <doctest.h>

#include <cmath>

#include "isomer/metrics.hpp"
#include "isomer/rng.hpp"
#include "isomer/shapes.hpp"
#include "test_helpers.hpp"

using namespace isomer;

namespace {

TriMesh square_at(double z, double side = 1.0) {
  TriMesh m;
  double h = side / 2;
  m.vertices = {{-h, -h, z}, {h, -h, z}, {h, h, z}, {-h, h, z}};
  m.faces = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

TriMesh rigidly_moved(TriMesh mesh, const Mat3& rot, const Vec3& t) {
  for (auto& v : mesh.vertices) v = rot * v + t;
  return mesh;
}

}  // namespace

TEST_CASE("normalize_unit_box") {
  TriMesh sphere = icosphere(0.5, 2);
  TriMesh normed = normalize_unit_box(sphere);
  Bounds3 b = bounds(normed);
  CHECK(std::max({b.extent().x, b.extent().y, b.extent().z}) == doctest::Approx(1.0));
  CHECK(norm(b.center()) < 1e-12);

  // Already normalized: identity.
  TriMesh again = normalize_unit_box(normed);
  for (int v = 0; v < normed.vertex_count(); ++v)
    CHECK(norm(again.vertices[v] - normed.vertices[v]) < 1e-9);

  // Scale + shift inverts exactly.
  TriMesh moved = normed;
  for (auto& v : moved.vertices) v = v * 3.0 + Vec3{0.4, -1.2, 7.0};
  TriMesh inverted = normalize_unit_box(moved);
  for (int v = 0; v < normed.vertex_count(); ++v)
    CHECK(norm(inverted.vertices[v] - normed.vertices[v]) < 1e-9);

  TriMesh degenerate;
  degenerate.vertices = {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}};
  degenerate.faces = {{0, 1, 2}};
  CHECK_THROWS_WITH(normalize_unit_box(degenerate), "zero-extent mesh");
}

TEST_CASE("grid nearest neighbor equals brute force") {
  TriMesh sphere = icosphere(0.5, 3);
  std::vector<Vec3> a = sample_surface(sphere, 1000, 11);
  std::vector<Vec3> b = sample_surface(sphere, 700, 22);
  NearestGrid grid(b);
  for (const auto& q : a) {
    double brute = 1e300;
    for (const auto& p : b) brute = std::min(brute, norm(p - q));
    CHECK(grid.nearest_distance(q) == brute);
  }
  // Queries far outside the grid extents stay exact.
  for (const Vec3& q : {Vec3{3, 3, 3}, Vec3{-2, 0.1, 5}}) {
    double brute = 1e300;
    for (const auto& p : b) brute = std::min(brute, norm(p - q));
    CHECK(grid.nearest_distance(q) == brute);
  }
}

TEST_CASE("chamfer: identical spheres at 10k samples stay under 0.01") {
  TriMesh sphere = icosphere(0.5, 3);
  double cd = chamfer_distance(sphere, sphere, 10000, 5);
  CHECK(cd > 0.0);
  CHECK(cd <= 0.01);
}

TEST_CASE("chamfer: parallel planes converge to their distance") {
  double d = 0.1;
  double cd = chamfer_distance(square_at(0.0), square_at(d), 10000, 3);
  CHECK(cd == doctest::Approx(d).epsilon(0.05));
}

TEST_CASE("chamfer is exactly symmetric") {
  TriMesh a = testing::noisy_sphere(1, 2, 0.4, 0.05);
  TriMesh b = icosphere(0.35, 2);
  CHECK(chamfer_distance(a, b, 5000, 9) == chamfer_distance(b, a, 5000, 9));
}

TEST_CASE("winding field: near one inside, near zero outside") {
  // The far field uses a dipole approximation (opening ratio 2), accurate to
  // a couple of percent -- plenty for the >= 0.5 inside test.
  TriMesh sphere = icosphere(0.4, 3);
  WindingField w(sphere);
  CHECK(w({0, 0, 0}) == doctest::Approx(1.0).epsilon(0.03));
  CHECK(w({0.1, -0.15, 0.2}) == doctest::Approx(1.0).epsilon(0.03));
  CHECK(std::abs(w({0.45, 0, 0})) < 0.03);
  CHECK(std::abs(w({3, 3, 3})) < 1e-3);

  // Exact near the surface where leaves open: probe just inside/outside.
  CHECK(w({0.395, 0, 0}) > 0.5);
  CHECK(w({0.405, 0, 0}) < 0.5);
}

TEST_CASE("volume iou: identity and disjoint") {
  TriMesh sphere = icosphere(0.35, 3);
  CHECK(volume_iou(sphere, sphere, 64) == doctest::Approx(1.0));
  TriMesh left = testing::translated(icosphere(0.15, 2), {-0.3, 0, 0});
  TriMesh right = testing::translated(icosphere(0.15, 2), {0.3, 0, 0});
  CHECK(volume_iou(left, right, 64) == doctest::Approx(0.0));
}

TEST_CASE("volume iou: shifted spheres match the lens closed form") {
  // Unit-box-inscribed spheres, one shifted by 0.1 along x. The voxel grid
  // clips the shifted sphere's cap outside [-0.5, 0.5]^3, so the closed form
  // subtracts it from the union.
  double r = 0.5, d = 0.1;
  TriMesh a = icosphere(r, 4);
  TriMesh b = testing::translated(icosphere(r, 4), {d, 0, 0});
  double vol = 4.0 / 3.0 * kPi * r * r * r;
  double lens = kPi * (4 * r + d) * (2 * r - d) * (2 * r - d) / 12.0;
  double cap_h = d;  // height of the cap protruding past x = 0.5
  double cap = kPi * cap_h * cap_h * (3 * r - cap_h) / 3.0;
  double expected = lens / (2 * vol - cap - lens);
  CHECK(volume_iou(a, b, 64) == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("fscore fixed points") {
  TriMesh sphere = icosphere(0.4, 3);
  CHECK(fscore(sphere, sphere, 0.05, 10000, 1) == doctest::Approx(1.0).epsilon(0.01));
  double tau = 0.05;
  CHECK(fscore(square_at(0), square_at(2 * tau), tau, 4000, 2) == doctest::Approx(0.0));
  CHECK(fscore(square_at(0), square_at(tau / 2), tau, 4000, 2) == doctest::Approx(1.0));
}

TEST_CASE("metrics are rigid-invariant within sampling noise") {
  TriMesh a = testing::noisy_sphere(4, 2, 0.35, 0.08);
  TriMesh b = icosphere(0.3, 2);
  Mat3 rot = Mat3::rotation_axis(normalized({1, 2, 0.5}), 0.8);
  Vec3 t{0.05, -0.03, 0.02};
  TriMesh ar = rigidly_moved(a, rot, t), br = rigidly_moved(b, rot, t);

  double cd = chamfer_distance(a, b, 10000, 7);
  double cdr = chamfer_distance(ar, br, 10000, 7);
  CHECK(cdr == doctest::Approx(cd).epsilon(0.02));

  double f = fscore(a, b, 0.05, 10000, 7);
  double fr = fscore(ar, br, 0.05, 10000, 7);
  CHECK(fr == doctest::Approx(f).epsilon(0.02));

  double iou = volume_iou(a, b, 64);
  double iour = volume_iou(ar, br, 64);
  CHECK(iour == doctest::Approx(iou).epsilon(0.02));
}

TEST_CASE("psnr closed forms") {
  Image<Vec3> a(32, 32, Vec3{0.3, 0.5, 0.7});
  CHECK(psnr(a, a) == doctest::Approx(99.0));
  Image<Vec3> b(32, 32, Vec3{0.4, 0.6, 0.8});
  CHECK(psnr(a, b) == doctest::Approx(20.0));  // MSE = 0.01
  Image<Vec3> c(16, 16);
  CHECK_THROWS(psnr(a, c));
}

TEST_CASE("ssim closed forms") {
  Image<Vec3> a(32, 32, Vec3{0.5, 0.5, 0.5});
  CHECK(ssim(a, a) == doctest::Approx(1.0));
  // Constant vs constant: variances vanish, only the luminance term remains.
  Image<Vec3> b(32, 32, Vec3{0.25, 0.25, 0.25});
  double c1 = 0.01 * 0.01;
  double expected = (2 * 0.5 * 0.25 + c1) / (0.5 * 0.5 + 0.25 * 0.25 + c1);
  CHECK(ssim(a, b) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("render_eval_views produces the 24-view ring") {
  TriMesh sphere = with_position_colors(icosphere(0.4, 2));
  auto views = render_eval_views(sphere, {0, 15, 30}, 8, 64);
  CHECK(views.size() == 24);
  // Background composited white.
  CHECK(norm(views[0].at(1, 1) - Vec3{1, 1, 1}) == 0.0);
}

TEST_CASE("metrics report serialization is stable") {
  MetricsReport r;
  r.chamfer = 0.01;
  r.volume_iou = 0.9;
  r.fscore = 0.95;
  r.fscore_tau = 0.05;
  std::string json = r.to_json();
  CHECK(json.find("\"chamfer\": 0.01") != std::string::npos);
  CHECK(json.find("\"volume_iou\": 0.9") != std::string::npos);
  CHECK(json.find("\"fscore_tau\": 0.05") != std::string::npos);
  CHECK(r.to_table().find("chamfer") != std::string::npos);
}
