#include "isomer/views.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "isomer/png_io.hpp"

namespace isomer {

namespace fs = std::filesystem;
using nlohmann::json;

Projection project(const OrthoView& view, const Vec3& v) {
  Vec3 cam = view.world_to_camera() * v;
  double s = view.ortho_half_extent;
  Projection p;
  p.pixel.x = (cam.x / s + 1.0) * 0.5 * view.width;
  p.pixel.y = (1.0 - cam.y / s) * 0.5 * view.height;
  p.depth = cam.z;
  p.in_bounds = p.pixel.x >= 0.0 && p.pixel.x <= view.width && p.pixel.y >= 0.0 &&
                p.pixel.y <= view.height;
  return p;
}

Vec3 unproject(const OrthoView& view, const Vec2& pixel, double depth) {
  double s = view.ortho_half_extent;
  Vec3 cam{(pixel.x / view.width * 2.0 - 1.0) * s, (1.0 - pixel.y / view.height * 2.0) * s,
           depth};
  return view.world_to_camera().transposed() * cam;
}

void save_manifest(const ViewSetManifest& manifest, const std::string& path) {
  json j;
  j["ortho_half_extent"] = manifest.ortho_half_extent;
  j["resolution"] = {manifest.width, manifest.height};
  j["views"] = json::array();
  for (const auto& v : manifest.views) {
    j["views"].push_back({{"azimuth_deg", v.azimuth_deg},
                          {"elevation_deg", v.elevation_deg},
                          {"mask", v.mask},
                          {"normal", v.normal},
                          {"rgb", v.rgb}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << j.dump(2) << '\n';
}

ViewSetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed manifest " + path + ": " + e.what());
  }
  ViewSetManifest m;
  m.ortho_half_extent = j.at("ortho_half_extent").get<double>();
  m.width = j.at("resolution").at(0).get<int>();
  m.height = j.at("resolution").at(1).get<int>();
  for (const auto& v : j.at("views")) {
    ManifestEntry e;
    e.azimuth_deg = v.at("azimuth_deg").get<double>();
    e.elevation_deg = v.at("elevation_deg").get<double>();
    e.mask = v.at("mask").get<std::string>();
    e.normal = v.at("normal").get<std::string>();
    e.rgb = v.at("rgb").get<std::string>();
    m.views.push_back(e);
  }
  return m;
}

namespace {

PngData read_view_image(const fs::path& dir, const std::string& name, double azimuth_deg,
                        int want_w, int want_h) {
  fs::path p = dir / name;
  if (!fs::exists(p)) throw std::runtime_error("missing view file: " + p.string());
  PngData img = read_png(p.string());
  if (img.rgb.width != want_w || img.rgb.height != want_h) {
    throw std::runtime_error("resolution mismatch for view at azimuth " +
                             std::to_string(azimuth_deg) + " deg in " + p.string());
  }
  return img;
}

}  // namespace

std::vector<ViewObservation> load_observations(const std::string& manifest_path) {
  ViewSetManifest m = load_manifest(manifest_path);
  if (m.views.size() < 2) throw std::runtime_error("at least 2 views required");
  fs::path dir = fs::path(manifest_path).parent_path();

  std::vector<ViewObservation> out;
  out.reserve(m.views.size());
  for (size_t i = 0; i < m.views.size(); ++i) {
    const auto& entry = m.views[i];
    ViewObservation obs;
    obs.view = m.view(int(i));

    PngData mask_img = read_view_image(dir, entry.mask, entry.azimuth_deg, m.width, m.height);
    obs.mask = Image<double>(m.width, m.height);
    for (int y = 0; y < m.height; ++y)
      for (int x = 0; x < m.width; ++x)
        obs.mask.at(x, y) = mask_img.has_alpha() ? mask_img.alpha.at(x, y)
                                                 : mask_img.rgb.at(x, y).x;

    PngData normal_img = read_view_image(dir, entry.normal, entry.azimuth_deg, m.width, m.height);
    obs.normal_map = Image<Vec3>(m.width, m.height);
    for (int y = 0; y < m.height; ++y) {
      for (int x = 0; x < m.width; ++x) {
        auto n = decode_normal(normal_img.rgb.at(x, y));
        obs.normal_map.at(x, y) = n ? *n : Vec3{0, 0, 0};
      }
    }

    PngData rgb_img = read_view_image(dir, entry.rgb, entry.azimuth_deg, m.width, m.height);
    obs.rgb = rgb_img.rgb;
    out.push_back(std::move(obs));
  }
  return out;
}

ViewObservation downsample_observation(const ViewObservation& obs, int width, int height) {
  if (obs.mask.width % width != 0 || obs.mask.height % height != 0)
    throw std::runtime_error("downsample factor must be integer");
  int fx = obs.mask.width / width, fy = obs.mask.height / height;
  ViewObservation out;
  out.view = obs.view;
  out.view.width = width;
  out.view.height = height;
  out.mask = Image<double>(width, height);
  out.normal_map = Image<Vec3>(width, height);
  out.rgb = Image<Vec3>(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double m_sum = 0;
      Vec3 n_sum{0, 0, 0}, c_sum{0, 0, 0};
      for (int dy = 0; dy < fy; ++dy) {
        for (int dx = 0; dx < fx; ++dx) {
          int sx = x * fx + dx, sy = y * fy + dy;
          double m = obs.mask.at(sx, sy);
          m_sum += m;
          n_sum += obs.normal_map.at(sx, sy) * m;  // mask-weighted
          c_sum += obs.rgb.at(sx, sy);
        }
      }
      double count = double(fx) * fy;
      out.mask.at(x, y) = m_sum / count;
      out.normal_map.at(x, y) = m_sum > 0 ? normalized(n_sum, {0, 0, 0}) : Vec3{0, 0, 0};
      out.rgb.at(x, y) = c_sum / count;
    }
  }
  return out;
}

std::vector<OrthoView> default_view_ring(int count, double elevation_deg, int resolution,
                                         double ortho_half_extent) {
  std::vector<OrthoView> views;
  for (int k = 0; k < count; ++k) {
    views.push_back({deg_to_rad(360.0 * k / count), deg_to_rad(elevation_deg),
                     ortho_half_extent, resolution, resolution});
  }
  return views;
}

}  // namespace isomer
