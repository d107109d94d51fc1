// Ground-truth fixture rendering: hard masks, camera-space normal maps, and
// RGB images for a set of orthographic views, written as PNGs + views.json.
#pragma once

#include <string>
#include <vector>

#include "isomer/trimesh.hpp"
#include "isomer/views.hpp"

namespace isomer {

struct FixtureOptions {
  int normal_bits = 8;  // 8 or 16; higher depth reduces quantization in tests
};

// The mesh must fit the [-0.5, 0.5]^3 box. RGB uses vertex colors when
// present, otherwise the position colormap c = p + 0.5.
ViewSetManifest generate_fixture(const TriMesh& gt_mesh, const std::vector<OrthoView>& views,
                                 const std::string& out_dir, const FixtureOptions& options = {});

// In-memory variant of the same rendering (no files written).
std::vector<ViewObservation> render_observations(const TriMesh& gt_mesh,
                                                 const std::vector<OrthoView>& views);

}  // namespace isomer
