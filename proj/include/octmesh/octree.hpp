#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "octmesh/curves.hpp"
#include "octmesh/rep_points.hpp"

namespace octmesh {

struct Bbox {
    Vec3 lo{0, 0, 0};
    Vec3 hi{1, 1, 1};
};

// Depth-d linear octree: strictly increasing leaf keys in curve order, one
// token payload per occupied cell (mean normalized coordinate in [0,1]^3,
// mean feature vector, point count), and a point -> leaf-rank map.
struct Octree {
    int depth = 0;
    CurveKind curve = CurveKind::ZOrder;
    Bbox bbox;
    int feature_dim = 0;
    std::vector<std::uint64_t> leaf_keys;
    std::vector<double> leaf_coords;  // L x 3
    std::vector<double> leaf_feats;   // L x F
    std::vector<int> leaf_counts;     // L
    std::vector<int> point_to_leaf;   // M

    int leaf_count() const { return static_cast<int>(leaf_keys.size()); }
    int point_count() const { return static_cast<int>(point_to_leaf.size()); }
    Vec3 leaf_coord(int rank) const {
        return {leaf_coords[3 * rank], leaf_coords[3 * rank + 1], leaf_coords[3 * rank + 2]};
    }
    const double* leaf_feature_row(int rank) const {
        return leaf_feats.data() + std::size_t(rank) * feature_dim;
    }
    std::array<std::uint32_t, 3> leaf_grid(int rank) const {
        return curve_decode(curve, OctKey{leaf_keys[rank], depth});
    }
    // Rank of the leaf with this curve code, or -1.
    int find_leaf(std::uint64_t code) const;
};

// Reusable results for meshes sharing connectivity. Keyed on a hash of the
// simplex array; holds the unique-edge list and the last quantization's sort
// permutation (revalidated against the new codes before reuse).
class StructureCache {
  public:
    std::vector<std::array<int, 2>>& edges_for(const Mesh& mesh);
    // Argsort of `codes`; reuses the cached permutation when codes match the
    // previous call for the same topology key.
    std::vector<int> argsort_codes(std::uint64_t topo_key,
                                   const std::vector<std::uint64_t>& codes);
    static std::uint64_t topology_key(const Mesh& mesh);

  private:
    struct Entry {
        std::vector<std::array<int, 2>> edges;
        std::vector<std::uint64_t> codes;
        std::vector<int> order;
        bool has_edges = false;
    };
    std::vector<std::pair<std::uint64_t, Entry>> entries_;
    Entry& entry(std::uint64_t key);
};

// Quantize points into the 2^d grid (floor, clamped at the upper boundary),
// aggregate per occupied cell, sort by curve code. Without an explicit bbox,
// the tight box of the points expanded by 1% per side is used; axes of zero
// extent are widened by one unit instead.
Octree build_octree(const RepPointSet& points, int depth, CurveKind curve,
                    const std::optional<Bbox>& bbox = std::nullopt,
                    StructureCache* cache = nullptr, std::uint64_t topo_key = 0);

// Fixed-size windows over a token sequence. Non-pad slots enumerate every
// token exactly once; slot value -1 marks padding.
struct WindowPartition {
    int window_size = 0;
    std::vector<std::int32_t> slots;  // window_count * window_size token ranks
    std::vector<std::uint8_t> pad_mask;

    int window_count() const {
        return window_size == 0 ? 0 : static_cast<int>(slots.size()) / window_size;
    }
    const std::int32_t* window(int w) const { return slots.data() + std::size_t(w) * window_size; }
};

// Consecutive runs of K ranks in key order; only the final window is padded.
WindowPartition partition_windows(int token_count, int window_size);
WindowPartition partition_windows(const Octree& octree, int window_size);

// Rank r joins residue class (r mod s); each class is windowed independently
// in rank order. stride 1 reproduces partition_windows bit-for-bit.
WindowPartition dilated_grouping(int token_count, int window_size, int stride);
WindowPartition dilated_grouping(const Octree& octree, int window_size, int stride);

// Ranks of the 27 stencil neighbors of a leaf (-1 where the cell is empty or
// off-grid; no wrap-around). Offset index o encodes (dx,dy,dz) in {-1,0,1}^3
// as (dx+1)*9 + (dy+1)*3 + (dz+1); index 13 is the leaf itself.
std::array<int, 27> leaf_neighbors(const Octree& octree, int rank);

// leaf_neighbors for every leaf, flattened L x 27.
std::vector<int> neighbor_table(const Octree& octree);

}  // namespace octmesh
