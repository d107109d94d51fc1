// Orthographic view setup, per-view observations, and the on-disk manifest
// (views.json + view_{k}_{mask|normal|rgb}.png).
//
// Camera frame is right-handed: +x right in the image, +y up, +z pointing
// from the object toward the camera. Azimuth orbits about world +y (azimuth 0
// places the camera on world +z), elevation tilts toward +y. Pixel (0,0) is
// the top-left corner; pixel centers sit at half-integer coordinates.
#pragma once

#include <string>
#include <vector>

#include "isomer/image.hpp"
#include "isomer/vec.hpp"

namespace isomer {

struct OrthoView {
  double azimuth = 0.0;    // radians
  double elevation = 0.0;  // radians
  double ortho_half_extent = 0.55;
  int width = 256, height = 256;

  // World -> camera rotation (rows are the camera axes in world coordinates).
  Mat3 world_to_camera() const {
    double ca = std::cos(azimuth), sa = std::sin(azimuth);
    double ce = std::cos(elevation), se = std::sin(elevation);
    Vec3 z{ce * sa, se, ce * ca};
    Vec3 x = normalized(cross(Vec3{0, 1, 0}, z));
    Vec3 y = cross(z, x);
    return Mat3::from_rows(x, y, z);
  }

  // Unit direction from the camera toward the object (-z of the camera frame).
  Vec3 view_direction() const { return -world_to_camera().row(2); }
};

struct Projection {
  Vec2 pixel;
  double depth;  // camera-frame z; larger = closer to the camera
  bool in_bounds = true;
};

Projection project(const OrthoView& view, const Vec3& v);
Vec3 unproject(const OrthoView& view, const Vec2& pixel, double depth);

struct ViewObservation {
  OrthoView view;
  Image<double> mask;      // soft coverage in [0,1]
  Image<Vec3> normal_map;  // unit camera-frame normals where mask > 0.5
  Image<Vec3> rgb;         // colors in [0,1]
};

struct ManifestEntry {
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  std::string mask, normal, rgb;  // file names relative to the manifest
};

struct ViewSetManifest {
  double ortho_half_extent = 0.55;
  int width = 256, height = 256;
  std::vector<ManifestEntry> views;

  OrthoView view(int i) const {
    return {deg_to_rad(views[i].azimuth_deg), deg_to_rad(views[i].elevation_deg),
            ortho_half_extent, width, height};
  }
};

void save_manifest(const ViewSetManifest& manifest, const std::string& path);
ViewSetManifest load_manifest(const std::string& path);

// Loads and decodes every view in the manifest. Requires >= 2 views; all
// three images of a view must match the manifest resolution.
std::vector<ViewObservation> load_observations(const std::string& manifest_path);

// Box-filter downsample (mask and rgb averaged, normals averaged then
// renormalized). Requires integer shrink factors.
ViewObservation downsample_observation(const ViewObservation& obs, int width, int height);

// Evenly spaced azimuths (k * 360/n degrees) at a fixed elevation.
std::vector<OrthoView> default_view_ring(int count, double elevation_deg = 0.0,
                                         int resolution = 256,
                                         double ortho_half_extent = 0.55);

}  // namespace isomer
