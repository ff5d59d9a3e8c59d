#include "octmesh/octree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "octmesh/errors.hpp"
#include "octmesh/rng.hpp"

namespace octmesh {

int Octree::find_leaf(std::uint64_t code) const {
    auto it = std::lower_bound(leaf_keys.begin(), leaf_keys.end(), code);
    if (it == leaf_keys.end() || *it != code) return -1;
    return static_cast<int>(it - leaf_keys.begin());
}

std::uint64_t StructureCache::topology_key(const Mesh& mesh) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    h = mix_u64(h, static_cast<std::uint64_t>(mesh.vertex_count()));
    h = mix_u64(h, static_cast<std::uint64_t>(mesh.simplex_order));
    for (int idx : mesh.simplices) h = mix_u64(h, static_cast<std::uint64_t>(idx));
    return h;
}

StructureCache::Entry& StructureCache::entry(std::uint64_t key) {
    for (auto& [k, e] : entries_)
        if (k == key) return e;
    entries_.emplace_back(key, Entry{});
    return entries_.back().second;
}

std::vector<std::array<int, 2>>& StructureCache::edges_for(const Mesh& mesh) {
    Entry& e = entry(topology_key(mesh));
    if (!e.has_edges) {
        e.edges = unique_edges(mesh);
        e.has_edges = true;
    }
    return e.edges;
}

std::vector<int> StructureCache::argsort_codes(std::uint64_t topo_key,
                                               const std::vector<std::uint64_t>& codes) {
    Entry& e = entry(topo_key);
    if (e.codes == codes) return e.order;
    std::vector<int> order(codes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return codes[a] < codes[b]; });
    e.codes = codes;
    e.order = order;
    return order;
}

namespace {

Bbox fit_bbox(const RepPointSet& points) {
    Bbox box;
    for (int a = 0; a < 3; ++a) {
        box.lo[a] = points.points[a];
        box.hi[a] = points.points[a];
    }
    for (int i = 1; i < points.count(); ++i) {
        for (int a = 0; a < 3; ++a) {
            box.lo[a] = std::min(box.lo[a], points.points[3 * i + a]);
            box.hi[a] = std::max(box.hi[a], points.points[3 * i + a]);
        }
    }
    for (int a = 0; a < 3; ++a) {
        const double extent = box.hi[a] - box.lo[a];
        if (extent == 0.0) {
            box.lo[a] -= 0.5;
            box.hi[a] += 0.5;
        } else {
            box.lo[a] -= 0.01 * extent;
            box.hi[a] += 0.01 * extent;
        }
    }
    return box;
}

}  // namespace

Octree build_octree(const RepPointSet& points, int depth, CurveKind curve,
                    const std::optional<Bbox>& bbox, StructureCache* cache,
                    std::uint64_t topo_key) {
    const int m = points.count();
    if (m == 0) throw DataError("cannot build an octree from an empty point set");
    if (depth < 1 || depth > kMaxCurveDepth)
        throw ConfigError("octree depth must be in [1, " + std::to_string(kMaxCurveDepth) + "]");

    Octree tree;
    tree.depth = depth;
    tree.curve = curve;
    tree.feature_dim = points.feature_dim;
    tree.bbox = bbox ? *bbox : fit_bbox(points);
    for (int a = 0; a < 3; ++a)
        if (!(tree.bbox.hi[a] > tree.bbox.lo[a]))
            throw DataError("degenerate bounding box on axis " + std::to_string(a));

    const double n_cells = std::exp2(depth);
    const std::uint32_t max_cell = (std::uint32_t(1) << depth) - 1;
    const int f = points.feature_dim;

    // normalized coordinates and curve codes per point
    std::vector<double> normalized(std::size_t(m) * 3);
    std::vector<std::uint64_t> codes(m);
    for (int i = 0; i < m; ++i) {
        std::uint32_t g[3];
        for (int a = 0; a < 3; ++a) {
            double u = (points.points[3 * i + a] - tree.bbox.lo[a]) /
                       (tree.bbox.hi[a] - tree.bbox.lo[a]);
            u = std::clamp(u, 0.0, 1.0);
            normalized[3 * i + a] = u;
            g[a] = std::min(static_cast<std::uint32_t>(u * n_cells), max_cell);
        }
        codes[i] = curve_encode(curve, g[0], g[1], g[2], depth).code;
    }

    std::vector<int> order;
    if (cache) {
        order = cache->argsort_codes(topo_key, codes);
    } else {
        order.resize(m);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return codes[a] < codes[b]; });
    }

    tree.point_to_leaf.assign(m, -1);
    std::vector<int> members;  // point ids of the current leaf
    std::size_t i = 0;
    while (i < order.size()) {
        const std::uint64_t code = codes[order[i]];
        members.clear();
        while (i < order.size() && codes[order[i]] == code) members.push_back(order[i++]);

        const int rank = tree.leaf_count();
        tree.leaf_keys.push_back(code);
        tree.leaf_counts.push_back(static_cast<int>(members.size()));
        for (int p : members) tree.point_to_leaf[p] = rank;

        // Accumulate payload rows in value order so that the sums (and hence
        // the means) are bit-identical under any input permutation.
        std::sort(members.begin(), members.end(), [&](int a, int b) {
            for (int c = 0; c < 3; ++c)
                if (normalized[3 * a + c] != normalized[3 * b + c])
                    return normalized[3 * a + c] < normalized[3 * b + c];
            for (int c = 0; c < f; ++c) {
                double fa = points.features[std::size_t(a) * f + c];
                double fb = points.features[std::size_t(b) * f + c];
                if (fa != fb) return fa < fb;
            }
            return false;
        });
        const double inv = 1.0 / static_cast<double>(members.size());
        for (int a = 0; a < 3; ++a) {
            double acc = 0;
            for (int p : members) acc += normalized[3 * p + a];
            tree.leaf_coords.push_back(acc * inv);
        }
        for (int c = 0; c < f; ++c) {
            double acc = 0;
            for (int p : members) acc += points.features[std::size_t(p) * f + c];
            tree.leaf_feats.push_back(acc * inv);
        }
    }
    return tree;
}

WindowPartition partition_windows(int token_count, int window_size) {
    if (window_size < 1) throw ConfigError("window size must be >= 1");
    WindowPartition part;
    part.window_size = window_size;
    if (token_count <= 0) return part;
    const int windows = (token_count + window_size - 1) / window_size;
    part.slots.reserve(std::size_t(windows) * window_size);
    for (int s = 0; s < windows * window_size; ++s)
        part.slots.push_back(s < token_count ? s : -1);
    part.pad_mask.resize(part.slots.size());
    for (std::size_t s = 0; s < part.slots.size(); ++s) part.pad_mask[s] = part.slots[s] < 0;
    return part;
}

WindowPartition partition_windows(const Octree& octree, int window_size) {
    return partition_windows(octree.leaf_count(), window_size);
}

WindowPartition dilated_grouping(int token_count, int window_size, int stride) {
    if (window_size < 1) throw ConfigError("window size must be >= 1");
    if (stride < 1) throw ConfigError("dilation stride must be >= 1");
    if (stride == 1) return partition_windows(token_count, window_size);

    WindowPartition part;
    part.window_size = window_size;
    for (int residue = 0; residue < stride; ++residue) {
        int in_class = 0;
        for (int r = residue; r < token_count; r += stride) {
            part.slots.push_back(r);
            ++in_class;
        }
        if (in_class == 0) continue;
        while (in_class % window_size != 0) {
            part.slots.push_back(-1);
            ++in_class;
        }
    }
    part.pad_mask.resize(part.slots.size());
    for (std::size_t s = 0; s < part.slots.size(); ++s) part.pad_mask[s] = part.slots[s] < 0;
    return part;
}

WindowPartition dilated_grouping(const Octree& octree, int window_size, int stride) {
    return dilated_grouping(octree.leaf_count(), window_size, stride);
}

std::array<int, 27> leaf_neighbors(const Octree& octree, int rank) {
    if (rank < 0 || rank >= octree.leaf_count())
        throw DataError("leaf rank " + std::to_string(rank) + " out of range");
    std::array<int, 27> out;
    const auto g = octree.leaf_grid(rank);
    const std::int64_t n = std::int64_t(1) << octree.depth;
    int o = 0;
    for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dz = -1; dz <= 1; ++dz, ++o) {
                const std::int64_t x = std::int64_t(g[0]) + dx;
                const std::int64_t y = std::int64_t(g[1]) + dy;
                const std::int64_t z = std::int64_t(g[2]) + dz;
                if (x < 0 || y < 0 || z < 0 || x >= n || y >= n || z >= n) {
                    out[o] = -1;
                    continue;
                }
                const auto key = curve_encode(octree.curve, std::uint32_t(x), std::uint32_t(y),
                                              std::uint32_t(z), octree.depth);
                out[o] = octree.find_leaf(key.code);
            }
    return out;
}

std::vector<int> neighbor_table(const Octree& octree) {
    std::vector<int> table(std::size_t(octree.leaf_count()) * 27);
    for (int rank = 0; rank < octree.leaf_count(); ++rank) {
        auto nbrs = leaf_neighbors(octree, rank);
        std::copy(nbrs.begin(), nbrs.end(), table.begin() + std::size_t(rank) * 27);
    }
    return table;
}

}  // namespace octmesh
