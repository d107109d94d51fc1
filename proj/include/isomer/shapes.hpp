// Procedural test/fixture geometry.
#pragma once

#include "isomer/trimesh.hpp"

namespace isomer {

// Subdivided icosahedron projected to a sphere; 20 * 4^subdivisions faces.
TriMesh icosphere(double radius, int subdivisions);

// Torus around the +z axis: ring radius R in the xy-plane, tube radius r.
TriMesh torus(double ring_radius, double tube_radius, int ring_segments = 48,
              int tube_segments = 24);

// Axis-aligned box of the given half extents with each face tessellated into
// a grid fine enough that no edge exceeds max_edge.
TriMesh box(const Vec3& half_extents, double max_edge);

// Sets colors to the position colormap c = p + 0.5 (positions clamped to the
// unit box).
TriMesh with_position_colors(TriMesh mesh);

}  // namespace isomer
