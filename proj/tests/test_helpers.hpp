// Shared fixtures and oracles for the test suites.
#pragma once

#include <cstdlib>
#include <fstream>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "isomer/rng.hpp"
#include "isomer/shapes.hpp"
#include "isomer/trimesh.hpp"

namespace isomer::testing {

inline std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("isomer_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Icosphere with seeded radial noise; closed, manifold, star-shaped (no
// self-occlusion), which keeps rendered normals continuous in the interior.
inline TriMesh noisy_sphere(uint64_t seed, int subdivisions = 1, double radius = 0.35,
                            double noise = 0.05) {
  TriMesh mesh = icosphere(radius, subdivisions);
  for (size_t v = 0; v < mesh.vertices.size(); ++v) {
    double amp = 1.0 + noise * (2.0 * hash_uniform(seed, v) - 1.0);
    mesh.vertices[v] *= amp;
  }
  return mesh;
}

inline TriMesh translated(TriMesh mesh, const Vec3& offset) {
  for (auto& v : mesh.vertices) v += offset;
  return mesh;
}

// Two-triangle unit quad in the z=0 plane, wound counter-clockwise from +z.
inline TriMesh unit_quad() {
  TriMesh mesh;
  mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  mesh.faces = {{0, 1, 2}, {0, 2, 3}};
  return mesh;
}

}  // namespace isomer::testing
