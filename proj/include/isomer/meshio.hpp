// OBJ and PLY mesh I/O. PLY vertex colors are stored as uchar, so color
// round-trips are lossy to 1/255.
#pragma once

#include <string>

#include "isomer/trimesh.hpp"

namespace isomer {

// Format chosen by extension (.obj, .ply). Throws with the offending path on
// failure. PLY is written binary little-endian; both binary and ascii PLY are
// read.
TriMesh load_mesh(const std::string& path);
void save_mesh(const TriMesh& mesh, const std::string& path);

}  // namespace isomer
