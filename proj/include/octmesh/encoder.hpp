#pragma once

#include <optional>
#include <string>
#include <vector>

#include "octmesh/config.hpp"
#include "octmesh/embedding.hpp"
#include "octmesh/mesh.hpp"
#include "octmesh/octree.hpp"
#include "octmesh/tape.hpp"

namespace octmesh {

// One pre-norm transformer block: windowed multi-head self-attention then a
// GELU MLP with 4x expansion, residuals around both.
struct BlockParams {
    Var ln1_g, ln1_b, wq, bq, wk, bk, wv, bv, wo, bo;
    Var ln2_g, ln2_b, w1, b1, w2, b2;
};

void init_block_params(ParamStore& store, const std::string& prefix, int dim, Rng& rng);
BlockParams bind_block(Tape& tape, ParamStore& store, const std::string& prefix);

// Attention restricted to the given windows; pad slots are excluded from the
// softmax (exactly zero attention mass to and from them) and produce no
// output rows. x is L x D in token order.
Var transformer_block(Var x, const WindowPartition& partition, const BlockParams& params,
                      int heads);

// Precomputed per-mesh-per-branch structure, reusable across steps/epochs.
struct BranchContext {
    Octree octree;
    std::vector<int> neighbors;  // L x 27 leaf ranks
};

BranchContext make_branch_context(const Mesh& mesh, const BranchConfig& branch,
                                  StructureCache* cache = nullptr);

// Parameter construction. Names are prefixed "b<branch>." so checkpoints are
// self-describing; call order fixes initialization.
void init_encoder_params(ParamStore& store, const RunConfig& cfg, int feature_dim, Rng& rng);
void init_decoder_params(ParamStore& store, const RunConfig& cfg, int feature_dim, Rng& rng);
void init_head_params(ParamStore& store, const RunConfig& cfg, int n_classes, Rng& rng);

// Encoder over one branch: projection, CPE placement per config, then the
// scheduled blocks. With `visible_ranks`, only those leaves enter the
// computation (windows re-partitioned over the subsequence in key order, CPE
// taps to hidden leaves dropped). Returns |ranks| x D latents in key order.
Var encode_branch(Tape& tape, ParamStore& store, const RunConfig& cfg, int branch,
                  const BranchContext& ctx, const std::vector<int>* visible_ranks = nullptr);

// Masked mean over tokens -> one 1 x D vector per branch.
Var pool_tokens(Var tokens);

// Softmax(alpha)-weighted sum of pooled branch vectors (1 x D each). With
// cfg.model.fusion off, the plain average.
Var fuse_branches(Tape& tape, ParamStore& store, const RunConfig& cfg,
                  const std::vector<Var>& pooled);

// Full classification pipeline for one mesh: per-branch encode, pool, fuse,
// linear head. Returns 1 x C logits.
Var classify_logits(Tape& tape, ParamStore& store, const RunConfig& cfg,
                    const std::vector<BranchContext>& branches);

// Per-vertex logits via branch 0: per-leaf linear head, each vertex inherits
// its leaf's row through point_to_leaf. Returns N x C.
Var segment_logits(Tape& tape, ParamStore& store, const RunConfig& cfg,
                   const BranchContext& branch0);

}  // namespace octmesh
