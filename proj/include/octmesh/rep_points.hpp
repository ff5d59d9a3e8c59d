#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "octmesh/mesh.hpp"

namespace octmesh {

// Which representative-point function seeds an octree branch.
enum class RepPointKind { Vertices, EdgeMidpoints, FaceCentroids, CellCentroids };

const char* to_string(RepPointKind k);
RepPointKind rep_point_kind_from_string(const std::string& s);

// Spatially localized points extracted from a mesh, each carrying the
// unweighted mean of its constituent vertices' feature rows.
//
// source[i] is a provenance tag: the vertex id for Vertices, the simplex id
// for CellCentroids (and FaceCentroids on triangle meshes), and the index
// into the lexicographically sorted unique edge/face list otherwise.
struct RepPointSet {
    RepPointKind kind = RepPointKind::Vertices;
    int feature_dim = 0;
    std::vector<double> points;        // M x 3
    std::vector<double> features;      // M x F
    std::vector<std::int64_t> source;  // M

    int count() const { return static_cast<int>(points.size() / 3); }
    Vec3 point(int i) const { return {points[3 * i], points[3 * i + 1], points[3 * i + 2]}; }
    const double* feature_row(int i) const {
        return features.data() + std::size_t(i) * feature_dim;
    }
};

// Vertices: identity copy. CellCentroids (k=4 only): mean of each
// tetrahedron's 4 vertices. FaceCentroids: one point per triangle (k=3) or
// per unique tetrahedron face (k=4). EdgeMidpoints: one point per unique
// undirected edge, edges ordered lexicographically by sorted index pair.
RepPointSet rep_points(const Mesh& mesh, RepPointKind kind);

// Unique undirected edges as sorted (lo, hi) pairs in lexicographic order.
// Exposed so callers can reuse it across meshes sharing connectivity.
std::vector<std::array<int, 2>> unique_edges(const Mesh& mesh);

}  // namespace octmesh
