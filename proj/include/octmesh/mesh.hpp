#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace octmesh {

using Vec3 = std::array<double, 3>;

// A simplicial mesh: vertices, uniform-order simplices (3 = triangles,
// 4 = tetrahedra) and an optional table of named per-vertex feature channels.
struct Mesh {
    int simplex_order = 3;
    std::vector<double> vertices;              // N x 3, row-major
    std::vector<int> simplices;                // S x k, row-major
    std::vector<double> features;              // N x F, row-major
    std::vector<std::string> feature_names;    // F

    int vertex_count() const { return static_cast<int>(vertices.size() / 3); }
    int simplex_count() const {
        return simplex_order == 0 ? 0 : static_cast<int>(simplices.size()) / simplex_order;
    }
    int feature_dim() const { return static_cast<int>(feature_names.size()); }

    Vec3 vertex(int i) const {
        return {vertices[3 * i], vertices[3 * i + 1], vertices[3 * i + 2]};
    }
    const int* simplex(int s) const { return simplices.data() + std::size_t(s) * simplex_order; }
    const double* feature_row(int i) const {
        return features.data() + std::size_t(i) * feature_dim();
    }

    // Throws DataError on index out of range, bad arity, NaN/Inf, or a
    // feature table whose row count disagrees with the vertex count.
    void validate() const;
};

enum class MeshFormat { Off, Tetgen };

// OFF (ASCII, triangles) or TetGen .node/.ele pair (tetrahedra). For Tetgen,
// `path` names the .node file (or the common stem); the .ele path is derived.
// Both 0- and 1-based .ele indexing are accepted (detected from the first
// node's index) and normalized to 0-based.
Mesh load_mesh(const std::string& path, MeshFormat format);

// CSV with a header row of channel names and one numeric row per vertex.
// Attaches the table to `mesh`; F becomes the column count.
void load_features(const std::string& path, Mesh& mesh);

// Writers used by the dataset generator and round-trip tests.
void save_mesh_off(const Mesh& mesh, const std::string& path);
void save_features_csv(const Mesh& mesh, const std::string& path);

// ASCII PLY point-cloud export; colors (0-255 RGB), when present, must match
// the point count. Coordinates are written at float32 precision.
void save_points_ply(const std::vector<Vec3>& points,
                     const std::vector<std::array<std::uint8_t, 3>>* colors,
                     const std::string& path);
std::vector<Vec3> load_points_ply(const std::string& path);

}  // namespace octmesh
