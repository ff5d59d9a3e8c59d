#pragma once

#include <vector>

#include "octmesh/octree.hpp"
#include "octmesh/tape.hpp"

namespace octmesh {

// Ordered token embeddings aligned with octree leaves. Row i corresponds to
// leaf_ranks[i] of the source octree (key order, possibly a visible subset).
struct TokenSequence {
    Var embeddings;               // |ranks| x D
    std::vector<int> leaf_ranks;  // row -> leaf rank
    int branch_id = 0;
};

// Constant L x (3+F) matrix of per-leaf payloads: mean normalized coordinate
// then mean feature vector, in that concatenation order.
Tensor octree_payload(const Octree& octree);
// Rows of the payload for a rank subset.
Tensor octree_payload_rows(const Octree& octree, const std::vector<int>& ranks);

// Per-token affine projection of [coord; features]: row_i = payload_i . W + b.
// W must be (3+F) x D for this octree's F.
TokenSequence project_tokens(Tape& tape, const Octree& octree, Var w, Var b, int branch_id = 0,
                             const std::vector<int>* ranks = nullptr);

// Depthwise 3x3x3 stencil convolution over occupied leaves with zero padding
// and a residual connection. `neighbors` follows the leaf_neighbors offset
// layout, flattened per token row (|tokens| x 27), entries indexing token
// rows (-1 = absent).
TokenSequence apply_cpe(Tape& tape, const TokenSequence& tokens, Var kernel, Var bias,
                        const std::vector<int>& neighbors);

// Neighbor table rows restricted to a rank subset: taps to ranks outside the
// subset become -1 and surviving taps are reindexed to subset positions.
std::vector<int> restrict_neighbors(const std::vector<int>& full_table,
                                    const std::vector<int>& ranks, int leaf_count);

}  // namespace octmesh
