#include "octmesh/mae.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "octmesh/errors.hpp"

namespace octmesh {

std::vector<int> MaskSpec::visible() const {
    std::vector<int> out;
    out.reserve(total - masked.size());
    for (int r = 0; r < total; ++r)
        if (!is_masked[r]) out.push_back(r);
    return out;
}

namespace {

int round_half_even(double x) {
    const double f = std::floor(x);
    const double frac = x - f;
    if (frac > 0.5) return int(f) + 1;
    if (frac < 0.5) return int(f);
    return int(f) % 2 == 0 ? int(f) : int(f) + 1;
}

}  // namespace

MaskSpec make_mask(int total, double ratio, std::uint64_t seed) {
    if (total < 1) throw DataError("mask requires at least one token");
    if (ratio < 0.0 || ratio >= 1.0)
        throw ConfigError("mask ratio must be in [0, 1), got " + std::to_string(ratio));
    MaskSpec spec;
    spec.total = total;
    spec.ratio = ratio;
    spec.seed = seed;
    const int count = round_half_even(ratio * total);

    std::vector<int> ranks(total);
    for (int i = 0; i < total; ++i) ranks[i] = i;
    Rng rng(seed);
    for (int i = 0; i < count; ++i) {
        const int j = i + int(rng.next_below(std::uint64_t(total - i)));
        std::swap(ranks[i], ranks[j]);
    }
    spec.masked.assign(ranks.begin(), ranks.begin() + count);
    std::sort(spec.masked.begin(), spec.masked.end());
    spec.is_masked.assign(total, 0);
    for (int r : spec.masked) spec.is_masked[r] = 1;
    return spec;
}

namespace {

// nearest neighbor in q by squared distance; lowest index wins ties
int nearest(const Vec3& p, const std::vector<Vec3>& q, double* best_out) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < q.size(); ++j) {
        const double dx = p[0] - q[j][0], dy = p[1] - q[j][1], dz = p[2] - q[j][2];
        const double d = dx * dx + dy * dy + dz * dz;
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(j);
        }
    }
    if (best_out) *best_out = best_d;
    return best;
}

}  // namespace

double chamfer(const std::vector<Vec3>& p, const std::vector<Vec3>& q, bool normalized) {
    if (p.empty() || q.empty()) throw DataError("chamfer distance of an empty point set");
    double forward = 0, backward = 0, d = 0;
    for (const auto& pi : p) {
        nearest(pi, q, &d);
        forward += d;
    }
    for (const auto& qi : q) {
        nearest(qi, p, &d);
        backward += d;
    }
    if (normalized) return forward / double(p.size()) + backward / double(q.size());
    return forward + backward;
}

Var chamfer_loss(Tape& tape, Var pred, const std::vector<Vec3>& target, bool normalized) {
    const Tensor& pv = pred.value();
    if (pv.shape.size() != 2 || pv.shape[1] != 3)
        throw NumericError("chamfer predictions must be M x 3, got " + pv.shape_str());
    const int m = pv.shape[0];
    if (m == 0 || target.empty()) throw DataError("chamfer distance of an empty point set");

    std::vector<Vec3> pred_pts(m);
    for (int i = 0; i < m; ++i) pred_pts[i] = {pv.at(i, 0), pv.at(i, 1), pv.at(i, 2)};

    // forward: each prediction to its nearest target
    Tensor fwd_targets = Tensor::zeros({m, 3});
    for (int i = 0; i < m; ++i) {
        const int j = nearest(pred_pts[i], target, nullptr);
        for (int a = 0; a < 3; ++a) fwd_targets.at(i, a) = target[j][a];
    }
    Var fd = sub(pred, tape.constant(std::move(fwd_targets)));
    Var fwd = sum_all(mul(fd, fd));

    // backward: each target to its nearest prediction (gather the matched rows)
    const int n = static_cast<int>(target.size());
    std::vector<int> matches(n);
    Tensor bwd_targets = Tensor::zeros({n, 3});
    for (int j = 0; j < n; ++j) {
        matches[j] = nearest(target[j], pred_pts, nullptr);
        for (int a = 0; a < 3; ++a) bwd_targets.at(j, a) = target[j][a];
    }
    Var bd = sub(gather_rows(pred, matches), tape.constant(std::move(bwd_targets)));
    Var bwd = sum_all(mul(bd, bd));

    if (normalized) return add(scalar_mul(fwd, 1.0 / m), scalar_mul(bwd, 1.0 / n));
    return add(fwd, bwd);
}

namespace {

// Cell center of the depth max(d-2, 0) ancestor, normalized to [0,1]^3.
// Coarse enough not to reveal the in-leaf mean the decoder must reconstruct.
Tensor coarse_positions(const Octree& octree) {
    const int coarse_depth = std::max(octree.depth - 2, 0);
    const int shift = octree.depth - coarse_depth;
    const double inv = 1.0 / std::exp2(coarse_depth);
    Tensor out = Tensor::zeros({octree.leaf_count(), 3});
    for (int r = 0; r < octree.leaf_count(); ++r) {
        const auto g = octree.leaf_grid(r);
        for (int a = 0; a < 3; ++a) out.at(r, a) = (double(g[a] >> shift) + 0.5) * inv;
    }
    return out;
}

}  // namespace

MaeOutput mae_forward(Tape& tape, ParamStore& store, const RunConfig& cfg, int branch,
                      const BranchContext& ctx, const MaskSpec& mask) {
    const int l = ctx.octree.leaf_count();
    if (mask.total != l)
        throw DataError("mask built for " + std::to_string(mask.total) + " tokens, octree has " +
                        std::to_string(l));
    MaeOutput out;
    out.masked_ranks = mask.masked;

    const std::vector<int> visible = mask.visible();
    out.latents = encode_branch(tape, store, cfg, branch, ctx, &visible);
    if (mask.masked.empty()) return out;  // nothing to reconstruct

    const std::string bp = "b" + std::to_string(branch) + ".dec";

    // visible latents at their original ranks, mask token everywhere else
    Var placed = scatter_rows(out.latents, visible, l);
    Var mask_token = tape.param(store.at(bp + ".mask"));
    Var mask_rows = gather_rows(mask_token, std::vector<int>(mask.masked.size(), 0));
    Var with_masks = add(placed, scatter_rows(mask_rows, mask.masked, l));
    Var pos = linear(tape.constant(coarse_positions(ctx.octree)),
                     tape.param(store.at(bp + ".pos.W")), tape.param(store.at(bp + ".pos.b")));
    Var x = add(with_masks, pos);

    for (int i = 0; i < cfg.mae.decoder_blocks; ++i) {
        WindowPartition part = partition_windows(l, cfg.model.window);
        x = transformer_block(x, part, bind_block(tape, store, bp + std::to_string(i)),
                              cfg.model.heads);
    }

    x = layer_norm(x, tape.param(store.at(bp + ".lnf.g")), tape.param(store.at(bp + ".lnf.b")));
    Var masked_latents = gather_rows(x, mask.masked);
    out.pred_coords = linear(masked_latents, tape.param(store.at(bp + ".head_x.W")),
                             tape.param(store.at(bp + ".head_x.b")));
    if (ctx.octree.feature_dim > 0)
        out.pred_feats = linear(masked_latents, tape.param(store.at(bp + ".head_f.W")),
                                tape.param(store.at(bp + ".head_f.b")));
    return out;
}

MaeLossParts mae_loss(Tape& tape, const MaeOutput& out, const Octree& octree, double lambda) {
    if (lambda < 0) throw ConfigError("feature loss weight must be >= 0");
    MaeLossParts parts;
    if (out.masked_ranks.empty()) {
        parts.total = tape.constant(Tensor({1}, {0.0}));
        return parts;
    }
    std::vector<Vec3> targets;
    targets.reserve(out.masked_ranks.size());
    for (int r : out.masked_ranks) targets.push_back(octree.leaf_coord(r));
    Var ch = chamfer_loss(tape, out.pred_coords, targets);
    parts.chamfer_value = ch.value().data[0];
    parts.total = ch;

    if (octree.feature_dim > 0) {
        const int m = static_cast<int>(out.masked_ranks.size());
        Tensor feat_targets = Tensor::zeros({m, octree.feature_dim});
        for (int i = 0; i < m; ++i) {
            const double* row = octree.leaf_feature_row(out.masked_ranks[i]);
            for (int c = 0; c < octree.feature_dim; ++c) feat_targets.at(i, c) = row[c];
        }
        Var fd = sub(out.pred_feats, tape.constant(std::move(feat_targets)));
        // mean over masked ranks of the squared feature-vector norm
        Var feat = scalar_mul(sum_all(mul(fd, fd)), 1.0 / m);
        parts.feat_value = feat.value().data[0];
        parts.total = add(parts.total, scalar_mul(feat, lambda));
    }
    return parts;
}

}  // namespace octmesh
