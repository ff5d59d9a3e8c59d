#include "octmesh/encoder.hpp"

#include <cmath>

#include "octmesh/errors.hpp"

namespace octmesh {

void init_block_params(ParamStore& store, const std::string& prefix, int dim, Rng& rng) {
    const int hidden = 4 * dim;
    store.add(prefix + ".ln1.g", Tensor::full({dim}, 1.0));
    store.add(prefix + ".ln1.b", Tensor::zeros({dim}));
    store.add(prefix + ".Wq", Tensor::xavier(dim, dim, rng));
    store.add(prefix + ".bq", Tensor::zeros({dim}));
    store.add(prefix + ".Wk", Tensor::xavier(dim, dim, rng));
    store.add(prefix + ".bk", Tensor::zeros({dim}));
    store.add(prefix + ".Wv", Tensor::xavier(dim, dim, rng));
    store.add(prefix + ".bv", Tensor::zeros({dim}));
    store.add(prefix + ".Wo", Tensor::xavier(dim, dim, rng));
    store.add(prefix + ".bo", Tensor::zeros({dim}));
    store.add(prefix + ".ln2.g", Tensor::full({dim}, 1.0));
    store.add(prefix + ".ln2.b", Tensor::zeros({dim}));
    store.add(prefix + ".W1", Tensor::xavier(dim, hidden, rng));
    store.add(prefix + ".b1", Tensor::zeros({hidden}));
    store.add(prefix + ".W2", Tensor::xavier(hidden, dim, rng));
    store.add(prefix + ".b2", Tensor::zeros({dim}));
}

BlockParams bind_block(Tape& tape, ParamStore& store, const std::string& prefix) {
    BlockParams p;
    p.ln1_g = tape.param(store.at(prefix + ".ln1.g"));
    p.ln1_b = tape.param(store.at(prefix + ".ln1.b"));
    p.wq = tape.param(store.at(prefix + ".Wq"));
    p.bq = tape.param(store.at(prefix + ".bq"));
    p.wk = tape.param(store.at(prefix + ".Wk"));
    p.bk = tape.param(store.at(prefix + ".bk"));
    p.wv = tape.param(store.at(prefix + ".Wv"));
    p.bv = tape.param(store.at(prefix + ".bv"));
    p.wo = tape.param(store.at(prefix + ".Wo"));
    p.bo = tape.param(store.at(prefix + ".bo"));
    p.ln2_g = tape.param(store.at(prefix + ".ln2.g"));
    p.ln2_b = tape.param(store.at(prefix + ".ln2.b"));
    p.w1 = tape.param(store.at(prefix + ".W1"));
    p.b1 = tape.param(store.at(prefix + ".b1"));
    p.w2 = tape.param(store.at(prefix + ".W2"));
    p.b2 = tape.param(store.at(prefix + ".b2"));
    return p;
}

Var transformer_block(Var x, const WindowPartition& partition, const BlockParams& params,
                      int heads) {
    const int l = x.value().shape[0];
    const int dim = x.value().shape[1];
    if (dim % heads != 0) throw NumericError("model dim not divisible by head count");
    const int dh = dim / heads;
    const double scale = 1.0 / std::sqrt(double(dh));
    const int k = partition.window_size;

    std::vector<Var> pieces;
    std::vector<int> targets;  // sequence rank per emitted row
    for (int w = 0; w < partition.window_count(); ++w) {
        const std::int32_t* slots = partition.window(w);
        std::vector<int> idx(k);
        std::vector<std::uint8_t> valid(k);
        for (int s = 0; s < k; ++s) {
            idx[s] = slots[s];
            valid[s] = slots[s] >= 0;
        }
        Var xw = gather_rows(x, idx);
        Var normed = layer_norm(xw, params.ln1_g, params.ln1_b);
        Var q = linear(normed, params.wq, params.bq);
        Var kk = linear(normed, params.wk, params.bk);
        Var v = linear(normed, params.wv, params.bv);
        std::vector<Var> head_outs;
        for (int h = 0; h < heads; ++h) {
            Var qh = slice_cols(q, h * dh, (h + 1) * dh);
            Var kh = slice_cols(kk, h * dh, (h + 1) * dh);
            Var vh = slice_cols(v, h * dh, (h + 1) * dh);
            Var scores = scalar_mul(matmul_nt(qh, kh), scale);
            Var attn = masked_softmax(scores, valid);
            head_outs.push_back(matmul(attn, vh));
        }
        Var ctx = heads == 1 ? head_outs[0] : concat_cols(head_outs);
        Var x2 = add(xw, linear(ctx, params.wo, params.bo));
        Var normed2 = layer_norm(x2, params.ln2_g, params.ln2_b);
        Var mlp = linear(gelu(linear(normed2, params.w1, params.b1)), params.w2, params.b2);
        pieces.push_back(add(x2, mlp));
        targets.insert(targets.end(), idx.begin(), idx.end());
    }
    if (pieces.empty()) return x;
    Var flat = pieces.size() == 1 ? pieces[0] : concat_rows(pieces);
    return scatter_rows(flat, targets, l);
}

BranchContext make_branch_context(const Mesh& mesh, const BranchConfig& branch,
                                  StructureCache* cache) {
    BranchContext ctx;
    RepPointSet rp;
    if (cache && branch.points == RepPointKind::EdgeMidpoints) {
        // reuse the unique-edge list across meshes sharing connectivity
        auto& edges = cache->edges_for(mesh);
        rp.kind = RepPointKind::EdgeMidpoints;
        rp.feature_dim = mesh.feature_dim();
        const int f = mesh.feature_dim();
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const auto& e = edges[i];
            auto a = mesh.vertex(e[0]);
            auto b = mesh.vertex(e[1]);
            for (int c = 0; c < 3; ++c) rp.points.push_back(0.5 * (a[c] + b[c]));
            for (int c = 0; c < f; ++c)
                rp.features.push_back(
                    0.5 * (mesh.feature_row(e[0])[c] + mesh.feature_row(e[1])[c]));
            rp.source.push_back(static_cast<std::int64_t>(i));
        }
    } else {
        rp = rep_points(mesh, branch.points);
    }
    std::uint64_t topo = 0;
    if (cache) {
        topo = StructureCache::topology_key(mesh);
        topo = mix_u64(topo, static_cast<std::uint64_t>(branch.points));
        topo = mix_u64(topo, static_cast<std::uint64_t>(branch.depth));
        topo = mix_u64(topo, static_cast<std::uint64_t>(branch.curve));
    }
    ctx.octree = build_octree(rp, branch.depth, branch.curve, std::nullopt, cache, topo);
    ctx.neighbors = neighbor_table(ctx.octree);
    return ctx;
}

void init_encoder_params(ParamStore& store, const RunConfig& cfg, int feature_dim, Rng& rng) {
    const int dim = cfg.model.dim;
    for (std::size_t b = 0; b < cfg.branches.size(); ++b) {
        const std::string bp = "b" + std::to_string(b);
        store.add(bp + ".proj.W", Tensor::xavier(3 + feature_dim, dim, rng));
        store.add(bp + ".proj.b", Tensor::zeros({dim}));
        const int cpe_count = cfg.model.cpe_per_block ? cfg.blocks() : 1;
        for (int j = 0; j < cpe_count; ++j) {
            store.add(bp + ".cpe" + std::to_string(j) + ".kernel",
                      Tensor::xavier(27, dim, rng));
            store.add(bp + ".cpe" + std::to_string(j) + ".bias", Tensor::zeros({dim}));
        }
        for (int i = 0; i < cfg.blocks(); ++i)
            init_block_params(store, bp + ".enc" + std::to_string(i), dim, rng);
        store.add(bp + ".lnf.g", Tensor::full({dim}, 1.0));
        store.add(bp + ".lnf.b", Tensor::zeros({dim}));
    }
    if (cfg.branches.size() > 1)
        store.add("fusion.alpha", Tensor::zeros({static_cast<int>(cfg.branches.size())}));
}

void init_decoder_params(ParamStore& store, const RunConfig& cfg, int feature_dim, Rng& rng) {
    const int dim = cfg.model.dim;
    for (std::size_t b = 0; b < cfg.branches.size(); ++b) {
        const std::string bp = "b" + std::to_string(b) + ".dec";
        store.add(bp + ".mask", Tensor::xavier(1, dim, rng));
        store.add(bp + ".pos.W", Tensor::xavier(3, dim, rng));
        store.add(bp + ".pos.b", Tensor::zeros({dim}));
        for (int i = 0; i < cfg.mae.decoder_blocks; ++i)
            init_block_params(store, bp + std::to_string(i), dim, rng);
        store.add(bp + ".lnf.g", Tensor::full({dim}, 1.0));
        store.add(bp + ".lnf.b", Tensor::zeros({dim}));
        store.add(bp + ".head_x.W", Tensor::xavier(dim, 3, rng));
        store.add(bp + ".head_x.b", Tensor::zeros({3}));
        if (feature_dim > 0) {
            store.add(bp + ".head_f.W", Tensor::xavier(dim, feature_dim, rng));
            store.add(bp + ".head_f.b", Tensor::zeros({feature_dim}));
        }
    }
}

void init_head_params(ParamStore& store, const RunConfig& cfg, int n_classes, Rng& rng) {
    store.add("head.W", Tensor::xavier(cfg.model.dim, n_classes, rng));
    store.add("head.b", Tensor::zeros({n_classes}));
}

Var encode_branch(Tape& tape, ParamStore& store, const RunConfig& cfg, int branch,
                  const BranchContext& ctx, const std::vector<int>* visible_ranks) {
    const std::string bp = "b" + std::to_string(branch);
    Var w = tape.param(store.at(bp + ".proj.W"));
    Var b = tape.param(store.at(bp + ".proj.b"));
    TokenSequence seq = project_tokens(tape, ctx.octree, w, b, branch, visible_ranks);

    std::vector<int> nbrs = visible_ranks
                                ? restrict_neighbors(ctx.neighbors, seq.leaf_ranks,
                                                     ctx.octree.leaf_count())
                                : ctx.neighbors;
    const int count = static_cast<int>(seq.leaf_ranks.size());
    Var x = seq.embeddings;
    for (int i = 0; i < cfg.blocks(); ++i) {
        if (cfg.model.cpe && (i == 0 || cfg.model.cpe_per_block)) {
            const std::string cp = bp + ".cpe" + std::to_string(cfg.model.cpe_per_block ? i : 0);
            x = cpe_conv(x, tape.param(store.at(cp + ".kernel")),
                         tape.param(store.at(cp + ".bias")), nbrs);
        }
        const ScheduleEntry& e = cfg.model.schedule[i];
        WindowPartition part = e.dilated ? dilated_grouping(count, e.window, e.stride)
                                         : partition_windows(count, e.window);
        x = transformer_block(x, part, bind_block(tape, store, bp + ".enc" + std::to_string(i)),
                              cfg.model.heads);
    }
    // final layer norm of the pre-norm stack
    return layer_norm(x, tape.param(store.at(bp + ".lnf.g")), tape.param(store.at(bp + ".lnf.b")));
}

Var pool_tokens(Var tokens) {
    return reshape(mean_axis(tokens, 0), {1, tokens.value().shape[1]});
}

Var fuse_branches(Tape& tape, ParamStore& store, const RunConfig& cfg,
                  const std::vector<Var>& pooled) {
    if (pooled.size() == 1) return pooled[0];
    Var stacked = concat_rows(pooled);  // K x D
    if (!cfg.model.fusion)
        return reshape(mean_axis(stacked, 0), {1, stacked.value().shape[1]});
    Var alpha = tape.param(store.at("fusion.alpha"));
    Var weights = softmax(reshape(alpha, {1, static_cast<int>(pooled.size())}));
    return matmul(weights, stacked);
}

Var classify_logits(Tape& tape, ParamStore& store, const RunConfig& cfg,
                    const std::vector<BranchContext>& branches) {
    std::vector<Var> pooled;
    for (std::size_t b = 0; b < branches.size(); ++b)
        pooled.push_back(pool_tokens(encode_branch(tape, store, cfg, int(b), branches[b])));
    Var fused = fuse_branches(tape, store, cfg, pooled);
    return linear(fused, tape.param(store.at("head.W")), tape.param(store.at("head.b")));
}

Var segment_logits(Tape& tape, ParamStore& store, const RunConfig& cfg,
                   const BranchContext& branch0) {
    Var tokens = encode_branch(tape, store, cfg, 0, branch0);
    Var leaf_logits =
        linear(tokens, tape.param(store.at("head.W")), tape.param(store.at("head.b")));
    return gather_rows(leaf_logits, branch0.octree.point_to_leaf);
}

}  // namespace octmesh
