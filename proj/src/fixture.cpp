#include "isomer/fixture.hpp"

#include <filesystem>
#include <stdexcept>

#include "isomer/png_io.hpp"
#include "isomer/raster.hpp"

namespace isomer {

namespace fs = std::filesystem;

namespace {

ViewObservation render_one(const TriMesh& mesh, const OrthoView& view) {
  RasterSettings settings;
  settings.normals = true;
  settings.colors = true;
  settings.sigma = 0.0;  // hard mask; skip the soft band entirely
  RenderOutput out = rasterize(mesh, view, settings);

  ViewObservation obs;
  obs.view = view;
  obs.mask = Image<double>(view.width, view.height);
  obs.normal_map = Image<Vec3>(view.width, view.height);
  obs.rgb = out.color_image;
  for (int y = 0; y < view.height; ++y) {
    for (int x = 0; x < view.width; ++x) {
      bool covered = out.face_id.at(x, y) >= 0;
      obs.mask.at(x, y) = covered ? 1.0 : 0.0;
      obs.normal_map.at(x, y) = covered ? out.normal_image.at(x, y) : Vec3{0, 0, 0};
    }
  }
  return obs;
}

}  // namespace

std::vector<ViewObservation> render_observations(const TriMesh& gt_mesh,
                                                 const std::vector<OrthoView>& views) {
  std::vector<ViewObservation> out;
  out.reserve(views.size());
  for (const auto& v : views) out.push_back(render_one(gt_mesh, v));
  return out;
}

ViewSetManifest generate_fixture(const TriMesh& gt_mesh, const std::vector<OrthoView>& views,
                                 const std::string& out_dir, const FixtureOptions& options) {
  if (views.size() < 2) throw std::runtime_error("at least 2 views required");
  Bounds3 b = bounds(gt_mesh);
  if (b.lo.x < -0.5 - 1e-9 || b.hi.x > 0.5 + 1e-9 || b.lo.y < -0.5 - 1e-9 ||
      b.hi.y > 0.5 + 1e-9 || b.lo.z < -0.5 - 1e-9 || b.hi.z > 0.5 + 1e-9)
    throw std::runtime_error("fixture mesh must fit the [-0.5, 0.5]^3 box");

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create directory: " + out_dir);

  ViewSetManifest manifest;
  manifest.ortho_half_extent = views[0].ortho_half_extent;
  manifest.width = views[0].width;
  manifest.height = views[0].height;

  for (size_t k = 0; k < views.size(); ++k) {
    if (views[k].width != manifest.width || views[k].height != manifest.height)
      throw std::runtime_error("all fixture views must share one resolution");
    ViewObservation obs = render_one(gt_mesh, views[k]);

    Image<Vec3> normal_png(obs.view.width, obs.view.height, Vec3{0.5, 0.5, 0.5});
    for (int y = 0; y < obs.view.height; ++y)
      for (int x = 0; x < obs.view.width; ++x)
        if (obs.mask.at(x, y) > 0.5)
          normal_png.at(x, y) = encode_normal(obs.normal_map.at(x, y));

    ManifestEntry entry;
    entry.azimuth_deg = rad_to_deg(views[k].azimuth);
    entry.elevation_deg = rad_to_deg(views[k].elevation);
    entry.mask = "view_" + std::to_string(k) + "_mask.png";
    entry.normal = "view_" + std::to_string(k) + "_normal.png";
    entry.rgb = "view_" + std::to_string(k) + "_rgb.png";
    write_png_gray((fs::path(out_dir) / entry.mask).string(), obs.mask, 8);
    write_png_rgb((fs::path(out_dir) / entry.normal).string(), normal_png,
                  options.normal_bits);
    write_png_rgb((fs::path(out_dir) / entry.rgb).string(), obs.rgb, 8);
    manifest.views.push_back(entry);
  }

  save_manifest(manifest, (fs::path(out_dir) / "views.json").string());
  return manifest;
}

}  // namespace isomer
