#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "isomer/fixture.hpp"
#include "isomer/metrics.hpp"
#include "isomer/png_io.hpp"
#include "isomer/rng.hpp"
#include "isomer/shapes.hpp"
#include "isomer/views.hpp"
#include "test_helpers.hpp"

using namespace isomer;
namespace fs = std::filesystem;

TEST_CASE("normal encoding formula") {
  Vec3 c = encode_normal({0, 0, 1});
  CHECK(norm(c - Vec3{0.5, 0.5, 1.0}) < 1e-12);
  auto n = decode_normal({1.0, 0.5, 0.5});
  REQUIRE(n.has_value());
  CHECK(norm(*n - Vec3{1, 0, 0}) < 1e-12);
  CHECK_FALSE(decode_normal({0.5, 0.5, 0.5}).has_value());
}

TEST_CASE("normal codec round trip at 8 bits stays under 0.6 degrees") {
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    double z = 2.0 * hash_uniform(42, i, 0) - 1.0;
    double phi = 2.0 * kPi * hash_uniform(42, i, 1);
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    Vec3 n{r * std::cos(phi), r * std::sin(phi), z};
    Vec3 c = encode_normal(n);
    Vec3 q{std::round(c.x * 255.0) / 255.0, std::round(c.y * 255.0) / 255.0,
           std::round(c.z * 255.0) / 255.0};
    auto back = decode_normal(q);
    REQUIRE(back.has_value());
    worst = std::max(worst, rad_to_deg(angle_between(n, *back)));
  }
  CHECK(worst <= 0.6);
}

TEST_CASE("camera transform round trip") {
  for (double az : {0.0, 37.0, 90.0, 180.0, 271.5}) {
    for (double el : {0.0, 15.0, -20.0, 30.0}) {
      OrthoView view{deg_to_rad(az), deg_to_rad(el), 0.55, 256, 256};
      Mat3 rot = view.world_to_camera();
      Mat3 round = rot.transposed() * rot;
      for (int i = 0; i < 9; ++i)
        CHECK(std::abs(round.m[i] - Mat3::identity().m[i]) < 1e-12);
      Vec3 p{0.21, -0.13, 0.39};
      CHECK(norm(unproject(view, project(view, p).pixel, (rot * p).z) - p) < 1e-9);
    }
  }
}

TEST_CASE("projection examples") {
  OrthoView front{0.0, 0.0, 0.55, 256, 256};
  Projection center = project(front, {0, 0, 0});
  CHECK(norm(center.pixel - Vec2{128, 128}) < 1e-12);
  CHECK(center.depth == doctest::Approx(0.0));

  Projection right = project(front, {0.55, 0, 0});
  CHECK(right.pixel.x == doctest::Approx(256.0));

  // +z world point seen from the azimuth-90 view lands left of center under
  // the right-handed frame.
  OrthoView side{deg_to_rad(90.0), 0.0, 0.55, 256, 256};
  Projection p = project(side, {0, 0, 0.3});
  CHECK(p.pixel.x == doctest::Approx(128.0 - 0.3 / 0.55 * 128.0));
  CHECK(p.pixel.y == doctest::Approx(128.0));
}

TEST_CASE("png round trip 8 and 16 bit") {
  auto dir = testing::temp_dir("png");
  Image<Vec3> img(17, 9);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 17; ++x)
      img.at(x, y) = {hash_uniform(1, x, y), hash_uniform(2, x, y), hash_uniform(3, x, y)};

  for (int bits : {8, 16}) {
    std::string path = (dir / ("rgb" + std::to_string(bits) + ".png")).string();
    write_png_rgb(path, img, bits);
    PngData back = read_png(path);
    REQUIRE(back.rgb.width == 17);
    REQUIRE(back.rgb.height == 9);
    CHECK(back.bit_depth == bits);
    double tol = bits == 8 ? 0.5 / 255.0 : 0.5 / 65535.0;
    for (size_t i = 0; i < img.pixel_count(); ++i) {
      CHECK(std::abs(back.rgb.data[i].x - img.data[i].x) <= tol + 1e-12);
      CHECK(std::abs(back.rgb.data[i].z - img.data[i].z) <= tol + 1e-12);
    }
  }

  Image<double> gray(5, 4);
  for (size_t i = 0; i < gray.pixel_count(); ++i) gray.data[i] = double(i) / 19.0;
  std::string path = (dir / "gray.png").string();
  write_png_gray(path, gray, 8);
  PngData back = read_png(path);
  for (size_t i = 0; i < gray.pixel_count(); ++i)
    CHECK(std::abs(back.rgb.data[i].x - gray.data[i]) <= 0.5 / 255.0 + 1e-12);
}

TEST_CASE("fixture: sphere silhouette radius and normals") {
  TriMesh sphere = icosphere(0.4, 4);
  auto dir = testing::temp_dir("fixture_sphere");
  generate_fixture(sphere, default_view_ring(4, 0.0, 256), dir.string());
  auto obs = load_observations((dir / "views.json").string());
  REQUIRE(obs.size() == 4);

  // Mask is a centered disc of radius 0.4 / 0.55 * 128 px.
  const auto& front = obs[0];
  double expected_r = 0.4 / 0.55 * 128.0;
  double max_r_in = 0.0, min_r_out = 1e9;
  for (int y = 0; y < 256; ++y) {
    for (int x = 0; x < 256; ++x) {
      double r = norm(Vec2{x + 0.5 - 128.0, y + 0.5 - 128.0});
      if (front.mask.at(x, y) > 0.5) max_r_in = std::max(max_r_in, r);
      else min_r_out = std::min(min_r_out, r);
    }
  }
  CHECK(max_r_in <= expected_r + 1.0);
  CHECK(min_r_out >= expected_r - 1.0);

  // Center pixel: decoded normal within 1 degree of +z (camera frame).
  Vec3 n = front.normal_map.at(128, 128);
  CHECK(rad_to_deg(angle_between(n, {0, 0, 1})) < 1.0);

  // All decoded in-mask normals unit length.
  for (int y = 0; y < 256; y += 7)
    for (int x = 0; x < 256; x += 7)
      if (front.mask.at(x, y) > 0.5)
        CHECK(std::abs(norm(front.normal_map.at(x, y)) - 1.0) < 1e-9);
}

TEST_CASE("fixture: mesh outside the frustum gives an empty mask") {
  TriMesh sphere = testing::translated(icosphere(0.05, 2), {5, 0, 0});
  std::vector<ViewObservation> obs = render_observations(sphere, default_view_ring(2, 0.0, 64));
  for (const auto& o : obs)
    for (double m : o.mask.data) CHECK(m == 0.0);
}

TEST_CASE("fixture: azimuth-180 mask mirrors azimuth-0") {
  TriMesh sphere = testing::translated(icosphere(0.3, 3), {0.1, 0.05, 0.0});
  auto obs = render_observations(sphere, default_view_ring(4, 0.0, 128));
  const auto& front = obs[0].mask;
  const auto& back = obs[2].mask;
  int mismatches = 0;
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x)
      mismatches += (front.at(x, y) > 0.5) != (back.at(127 - x, y) > 0.5);
  CHECK(mismatches <= 128);  // within a 1 px band of the silhouette
}

TEST_CASE("fixture roundtrip: decoded normals match rendered normals") {
  TriMesh sphere = icosphere(0.4, 3);
  auto dir = testing::temp_dir("fixture_rt");
  FixtureOptions options;
  options.normal_bits = 16;
  generate_fixture(sphere, default_view_ring(2, 0.0, 64), dir.string(), options);
  auto obs = load_observations((dir / "views.json").string());
  auto direct = render_observations(sphere, default_view_ring(2, 0.0, 64));
  double worst = 0.0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      if (direct[0].mask.at(x, y) > 0.5 && obs[0].mask.at(x, y) > 0.5)
        worst = std::max(worst, angle_between(obs[0].normal_map.at(x, y),
                                              direct[0].normal_map.at(x, y)));
  CHECK(rad_to_deg(worst) < 0.01);  // 16-bit quantization
}

TEST_CASE("load_observations error paths") {
  TriMesh sphere = icosphere(0.4, 2);
  auto dir = testing::temp_dir("fixture_err");
  generate_fixture(sphere, default_view_ring(2, 0.0, 32), dir.string());

  SUBCASE("single view rejected") {
    ViewSetManifest m = load_manifest((dir / "views.json").string());
    m.views.resize(1);
    save_manifest(m, (dir / "views.json").string());
    CHECK_THROWS_WITH(load_observations((dir / "views.json").string()),
                      "at least 2 views required");
  }

  SUBCASE("missing file names the path") {
    fs::remove(dir / "view_1_rgb.png");
    try {
      load_observations((dir / "views.json").string());
      FAIL("expected throw");
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find("view_1_rgb.png") != std::string::npos);
    }
  }

  SUBCASE("resolution mismatch names the azimuth") {
    Image<double> wrong(16, 16, 1.0);
    write_png_gray((dir / "view_1_mask.png").string(), wrong);
    try {
      load_observations((dir / "views.json").string());
      FAIL("expected throw");
    } catch (const std::exception& e) {
      std::string msg = e.what();
      CHECK(msg.find("azimuth 180") != std::string::npos);
      CHECK(msg.find("view_1_mask.png") != std::string::npos);
    }
  }
}

TEST_CASE("fixture determinism: identical bytes across runs") {
  TriMesh sphere = with_position_colors(icosphere(0.35, 3));
  auto dir1 = testing::temp_dir("fix_det1");
  auto dir2 = testing::temp_dir("fix_det2");
  generate_fixture(sphere, default_view_ring(2, 0.0, 64), dir1.string());
  generate_fixture(sphere, default_view_ring(2, 0.0, 64), dir2.string());
  for (const char* name : {"view_0_mask.png", "view_0_normal.png", "view_0_rgb.png"}) {
    std::ifstream a(dir1 / name, std::ios::binary), b(dir2 / name, std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(a)), {});
    std::string sb((std::istreambuf_iterator<char>(b)), {});
    CHECK(sa == sb);
    CHECK(!sa.empty());
  }
}
