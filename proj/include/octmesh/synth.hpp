#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "octmesh/mesh.hpp"
#include "octmesh/rng.hpp"

namespace octmesh {

enum class SynthKind { Ellipsoids, BoxesVsSpheres };
SynthKind synth_kind_from_string(const std::string& s);

using Mat3 = std::array<double, 9>;  // row-major rotation

// UV-sphere tessellation (rings x segments + 2 poles = 482 vertices by
// default) scaled per axis then rotated.
Mesh make_ellipsoid(Vec3 scales, const Mat3& rotation, int rings = 15, int segments = 32);

// Cube surface with each face split into divisions^2 quads (488 vertices at
// the default), welded along edges, scaled and rotated.
Mesh make_box(Vec3 scales, const Mat3& rotation, int divisions = 9);

// Two per-vertex channels: "curv" (angle defect, a discrete curvature proxy)
// and "radial" (distance to the vertex centroid).
void add_synthetic_features(Mesh& mesh);

Mat3 random_rotation(Rng& rng);

struct SynthItem {
    std::string stem;
    int label = 0;  // boxes-vs-spheres: 0 = box, 1 = sphere
};

// Writes <stem>.off and <stem>.features.csv per mesh into out_dir, plus
// labels.csv for the two-class kind. Deterministic per (kind, n, seed).
std::vector<SynthItem> synth_dataset(SynthKind kind, int n, std::uint64_t seed,
                                     const std::string& out_dir);

// In-memory variant used by tests and the acceptance suite.
std::vector<Mesh> synth_meshes(SynthKind kind, int n, std::uint64_t seed,
                               std::vector<int>* labels = nullptr);

}  // namespace octmesh
