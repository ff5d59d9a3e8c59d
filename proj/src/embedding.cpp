#include "octmesh/embedding.hpp"

#include "octmesh/errors.hpp"

namespace octmesh {

Tensor octree_payload(const Octree& octree) {
    std::vector<int> ranks(octree.leaf_count());
    for (int i = 0; i < octree.leaf_count(); ++i) ranks[i] = i;
    return octree_payload_rows(octree, ranks);
}

Tensor octree_payload_rows(const Octree& octree, const std::vector<int>& ranks) {
    const int f = octree.feature_dim;
    Tensor out = Tensor::zeros({static_cast<int>(ranks.size()), 3 + f});
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        const int r = ranks[i];
        for (int a = 0; a < 3; ++a) out.at(int(i), a) = octree.leaf_coords[3 * r + a];
        const double* feat = octree.leaf_feature_row(r);
        for (int c = 0; c < f; ++c) out.at(int(i), 3 + c) = feat[c];
    }
    return out;
}

TokenSequence project_tokens(Tape& tape, const Octree& octree, Var w, Var b, int branch_id,
                             const std::vector<int>* ranks) {
    if (w.value().shape.size() != 2 || w.value().shape[0] != 3 + octree.feature_dim)
        throw NumericError("projection weights expect " +
                           std::to_string(3 + octree.feature_dim) + " input channels, got " +
                           w.value().shape_str());
    TokenSequence seq;
    seq.branch_id = branch_id;
    if (ranks) {
        seq.leaf_ranks = *ranks;
    } else {
        seq.leaf_ranks.resize(octree.leaf_count());
        for (int i = 0; i < octree.leaf_count(); ++i) seq.leaf_ranks[i] = i;
    }
    Var payload = tape.constant(octree_payload_rows(octree, seq.leaf_ranks));
    seq.embeddings = linear(payload, w, b);
    return seq;
}

TokenSequence apply_cpe(Tape& tape, const TokenSequence& tokens, Var kernel, Var bias,
                        const std::vector<int>& neighbors) {
    if (neighbors.size() != tokens.leaf_ranks.size() * 27)
        throw NumericError("neighbor table does not match token count");
    TokenSequence out = tokens;
    out.embeddings = cpe_conv(tokens.embeddings, kernel, bias, neighbors);
    return out;
}

std::vector<int> restrict_neighbors(const std::vector<int>& full_table,
                                    const std::vector<int>& ranks, int leaf_count) {
    std::vector<int> rank_to_pos(leaf_count, -1);
    for (std::size_t i = 0; i < ranks.size(); ++i) rank_to_pos[ranks[i]] = static_cast<int>(i);
    std::vector<int> out(ranks.size() * 27, -1);
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        const int* row = full_table.data() + std::size_t(ranks[i]) * 27;
        for (int o = 0; o < 27; ++o)
            if (row[o] >= 0) out[i * 27 + o] = rank_to_pos[row[o]];
    }
    return out;
}

}  // namespace octmesh
