// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Optionally pass criterion numbers to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "octmesh/mae.hpp"
#include "octmesh/synth.hpp"
#include "octmesh/train.hpp"

using namespace octmesh;
using octmesh::testing::gradcheck;

namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string temp_dir(const std::string& tag) {
    auto p = fs::temp_directory_path() / ("octmesh_accept_" + tag + "_" +
                                          std::to_string(::getpid()));
    fs::create_directories(p);
    return p.string();
}

bool check(bool ok, std::string& detail, const std::string& msg) {
    if (!ok && detail.empty()) detail = msg;
    return ok;
}

// --- 1: curve bijections and Hilbert adjacency -------------------------------

bool crit_curves(std::string& detail) {
    bool ok = true;
    std::set<std::uint64_t> zcodes, hcodes;
    auto prev = hilbert_decode(OctKey{0, 3});
    for (std::uint32_t x = 0; x < 8 && ok; ++x)
        for (std::uint32_t y = 0; y < 8 && ok; ++y)
            for (std::uint32_t z = 0; z < 8 && ok; ++z) {
                OctKey zk = zorder_encode(x, y, z, 3);
                OctKey hk = hilbert_encode(x, y, z, 3);
                zcodes.insert(zk.code);
                hcodes.insert(hk.code);
                auto zd = zorder_decode(zk);
                auto hd = hilbert_decode(hk);
                ok &= check(zd[0] == x && zd[1] == y && zd[2] == z, detail,
                            "zorder decode mismatch");
                ok &= check(hd[0] == x && hd[1] == y && hd[2] == z, detail,
                            "hilbert decode mismatch");
            }
    ok &= check(zcodes.size() == 512 && hcodes.size() == 512, detail,
                "codes not a bijection onto [0,512)");
    for (std::uint64_t c = 1; c < 512 && ok; ++c) {
        auto cur = hilbert_decode(OctKey{c, 3});
        long l1 = std::labs(long(cur[0]) - long(prev[0])) +
                  std::labs(long(cur[1]) - long(prev[1])) +
                  std::labs(long(cur[2]) - long(prev[2]));
        ok &= check(l1 == 1, detail,
                    "hilbert codes " + std::to_string(c - 1) + "," + std::to_string(c) +
                        " not L1-adjacent");
        prev = cur;
    }
    return ok;
}

// --- 2: octree invariants under fuzzing --------------------------------------

bool crit_octree_fuzz(std::string& detail) {
    Rng rng(424242);
    for (int iter = 0; iter < 1000; ++iter) {
        const int m = 1 + int(rng.next_below(2000));
        const int d = 1 + int(rng.next_below(8));
        const CurveKind curve = iter % 2 ? CurveKind::Hilbert : CurveKind::ZOrder;
        RepPointSet rp;
        rp.feature_dim = 0;
        const double sx = rng.next_range(0.5, 20), sy = rng.next_range(0.5, 20);
        for (int i = 0; i < m; ++i) {
            rp.points.push_back(rng.next_range(-sx, sx));
            rp.points.push_back(rng.next_range(0, sy));
            rp.points.push_back(rng.next_range(3, 4));
            rp.source.push_back(0);
        }
        Octree t = build_octree(rp, d, curve);

        for (int r = 1; r < t.leaf_count(); ++r)
            if (!check(t.leaf_keys[r - 1] < t.leaf_keys[r], detail,
                       "leaf keys not strictly increasing"))
                return false;
        long total = 0;
        for (int c : t.leaf_counts) total += c;
        if (!check(total == m, detail, "leaf counts do not conserve point count")) return false;

        const double cell = std::exp2(-d);
        for (int r = 0; r < t.leaf_count(); ++r) {
            auto g = t.leaf_grid(r);
            for (int a = 0; a < 3; ++a) {
                const double u = t.leaf_coord(r)[a];
                if (!check(u >= g[a] * cell && u <= (g[a] + 1) * cell, detail,
                           "leaf mean outside its cell"))
                    return false;
            }
        }

        // permutation invariance (reversed input)
        RepPointSet rev;
        rev.feature_dim = 0;
        for (int i = m - 1; i >= 0; --i) {
            rev.points.insert(rev.points.end(), rp.points.begin() + 3 * i,
                              rp.points.begin() + 3 * i + 3);
            rev.source.push_back(0);
        }
        Octree t2 = build_octree(rev, d, curve);
        if (!check(t2.leaf_keys == t.leaf_keys && t2.leaf_coords == t.leaf_coords &&
                       t2.leaf_counts == t.leaf_counts,
                   detail, "construction not invariant to input permutation"))
            return false;
    }
    return true;
}

// --- 3: partition coverage ----------------------------------------------------

bool crit_partitions(std::string& detail) {
    Rng rng(777);
    for (int iter = 0; iter < 400; ++iter) {
        const int l = int(rng.next_below(501));
        const int k = 1 + int(rng.next_below(64));
        const int s = 1 + int(rng.next_below(8));
        auto local = partition_windows(l, k);
        auto dil = dilated_grouping(l, k, s);
        for (const WindowPartition* p : {&local, &dil}) {
            std::vector<int> seen(l, 0);
            for (std::size_t i = 0; i < p->slots.size(); ++i) {
                if (p->pad_mask[i]) {
                    if (!check(p->slots[i] < 0, detail, "pad slot with a token")) return false;
                    continue;
                }
                const int r = p->slots[i];
                if (!check(r >= 0 && r < l, detail, "slot out of range")) return false;
                seen[r] += 1;
            }
            for (int r = 0; r < l; ++r)
                if (!check(seen[r] == 1, detail, "token not covered exactly once")) return false;
        }
        auto dil1 = dilated_grouping(l, k, 1);
        if (!check(dil1.slots == local.slots && dil1.pad_mask == local.pad_mask, detail,
                   "stride-1 dilation differs from the local partition"))
            return false;
    }
    return true;
}

// --- 4: chamfer vs brute force -------------------------------------------------

bool crit_chamfer(std::string& detail) {
    Rng rng(31337);
    for (int iter = 0; iter < 500; ++iter) {
        const int np = 1 + int(rng.next_below(64));
        const int nq = 1 + int(rng.next_below(64));
        std::vector<Vec3> p(np), q(nq);
        for (auto& v : p) v = {rng.next_range(-2, 2), rng.next_range(-2, 2), rng.next_double()};
        for (auto& v : q) v = {rng.next_range(-2, 2), rng.next_range(-2, 2), rng.next_double()};
        double fwd = 0, bwd = 0;
        for (const auto& a : p) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& b : q)
                best = std::min(best, (a[0] - b[0]) * (a[0] - b[0]) +
                                          (a[1] - b[1]) * (a[1] - b[1]) +
                                          (a[2] - b[2]) * (a[2] - b[2]));
            fwd += best;
        }
        for (const auto& b : q) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& a : p)
                best = std::min(best, (a[0] - b[0]) * (a[0] - b[0]) +
                                          (a[1] - b[1]) * (a[1] - b[1]) +
                                          (a[2] - b[2]) * (a[2] - b[2]));
            bwd += best;
        }
        if (!check(chamfer(p, q) == fwd + bwd, detail, "chamfer differs from brute force"))
            return false;
        if (!check(chamfer(p, p) == 0.0, detail, "chamfer(P,P) nonzero")) return false;
    }
    return true;
}

// --- 5: gradient checks ----------------------------------------------------------

RunConfig gradcheck_config() {
    RunConfig cfg;
    cfg.seed = 7;
    cfg.branches.push_back(BranchConfig{RepPointKind::Vertices, 3, CurveKind::ZOrder});
    cfg.model.dim = 8;
    cfg.model.heads = 2;
    cfg.model.window = 6;
    cfg.model.schedule = {ScheduleEntry{false, 6, 1}, ScheduleEntry{true, 6, 2}};
    cfg.mae.decoder_blocks = 2;
    return cfg;
}

bool crit_gradcheck(std::string& detail) {
    // (a) op suite
    {
        Rng rng(20240601);
        auto rnd = [&](std::vector<int> shape, double lo = -1.0, double hi = 1.0) {
            Tensor t = Tensor::zeros(std::move(shape));
            for (double& v : t.data) v = rng.next_range(lo, hi);
            return t;
        };
        ParamStore store;
        Param& a = store.add("a", rnd({4, 6}));
        Param& b = store.add("b", rnd({4, 6}));
        Param& w = store.add("w", rnd({6, 3}));
        Param& bias = store.add("bias", rnd({3}));
        Param& gamma = store.add("gamma", rnd({6}, 0.5, 1.5));
        Param& beta = store.add("beta", rnd({6}));
        Param& kernel = store.add("kernel", rnd({27, 3}, -0.3, 0.3));
        Param& cbias = store.add("cbias", rnd({3}));
        std::vector<int> nbrs(2 * 27, -1);
        nbrs[0 * 27 + 13] = 0;
        nbrs[0 * 27 + 22] = 1;
        nbrs[1 * 27 + 13] = 1;
        nbrs[1 * 27 + 4] = 0;
        Tensor weights = rnd({4, 3});

        auto build = [&](Tape& tape) {
            Var va = tape.param(a), vb = tape.param(b);
            Var mixed = sub(scalar_mul(add(va, vb), 0.7), mul(va, vb));
            Var normed = layer_norm(mixed, tape.param(gamma), tape.param(beta), 1e-5);
            Var activated = gelu(normed);
            Var joined = concat_cols({softmax(slice_cols(activated, 0, 4)),
                                      masked_softmax(slice_cols(activated, 2, 6), {1, 0, 1, 1})});
            Var projected = linear(slice_cols(joined, 0, 6), tape.param(w), tape.param(bias));
            Var conv = cpe_conv(gather_rows(projected, {1, 3}), tape.param(kernel),
                                tape.param(cbias), std::vector<int>(nbrs));
            Var spread = scatter_rows(conv, {0, 2}, 4);
            Var row = reshape(mean_axis(matmul_nt(spread, tape.constant(weights)), 0), {1, 4});
            Var more = softmax_cross_entropy_rows(spread, {0, 1, 2, 0});
            return add(add(softmax_cross_entropy(row, 2), mean_all(spread)), more);
        };
        auto loss_value = [&]() {
            Tape tape;
            return build(tape).value().data[0];
        };
        Tape tape;
        Var loss = build(tape);
        tape.backward(loss, &store);
        auto report = gradcheck(store, loss_value);
        if (!check(report.max_rel_err < 1e-5, detail,
                   "op-suite gradcheck rel err " + std::to_string(report.max_rel_err) + " at " +
                       report.worst))
            return false;
    }
    // (b) 2-block encoder
    RunConfig cfg = gradcheck_config();
    {
        Mesh mesh = make_ellipsoid({1.2, 0.8, 1.0}, Mat3{1, 0, 0, 0, 1, 0, 0, 0, 1}, 3, 6);
        add_synthetic_features(mesh);
        BranchContext ctx = make_branch_context(mesh, cfg.branches[0]);
        ParamStore store;
        Rng rng(derive_seed(7, "init"));
        init_encoder_params(store, cfg, 2, rng);
        Rng head_rng(derive_seed(7, "head"));
        init_head_params(store, cfg, 2, head_rng);
        auto loss_value = [&]() {
            Tape tape;
            return softmax_cross_entropy(classify_logits(tape, store, cfg, {ctx}), 1)
                .value()
                .data[0];
        };
        Tape tape;
        Var loss = softmax_cross_entropy(classify_logits(tape, store, cfg, {ctx}), 1);
        tape.backward(loss, &store);
        auto report = gradcheck(store, loss_value);
        if (!check(report.max_rel_err < 1e-5, detail,
                   "encoder gradcheck rel err " + std::to_string(report.max_rel_err) + " at " +
                       report.worst))
            return false;
    }
    // (c) full MAE loss through decoder + chamfer + feature MSE, 6 tokens
    {
        RunConfig mcfg = gradcheck_config();
        mcfg.branches[0].depth = 2;
        mcfg.model.schedule = {ScheduleEntry{false, 4, 1}};
        RepPointSet rp;
        rp.feature_dim = 1;
        const std::vector<Vec3> pts = {{0.1, 0.1, 0.1}, {0.9, 0.1, 0.1}, {0.1, 0.9, 0.1},
                                       {0.9, 0.9, 0.1}, {0.1, 0.1, 0.9}, {0.9, 0.9, 0.9}};
        for (std::size_t i = 0; i < pts.size(); ++i) {
            rp.points.insert(rp.points.end(), pts[i].begin(), pts[i].end());
            rp.features.push_back(0.1 * double(i));
            rp.source.push_back(0);
        }
        BranchContext ctx;
        ctx.octree = build_octree(rp, 2, CurveKind::ZOrder, Bbox{{0, 0, 0}, {1, 1, 1}});
        ctx.neighbors = neighbor_table(ctx.octree);

        for (std::uint64_t attempt = 0; attempt < 8; ++attempt) {
            ParamStore store;
            Rng rng(derive_seed(11 + attempt, "init"));
            init_encoder_params(store, mcfg, 1, rng);
            init_decoder_params(store, mcfg, 1, rng);
            MaskSpec mask = make_mask(6, 0.5, 3 + attempt);

            // tie detection: nearest-neighbor margins must dwarf the probes
            bool ties = false;
            {
                Tape tape;
                MaeOutput out = mae_forward(tape, store, mcfg, 0, ctx, mask);
                const Tensor& pred = out.pred_coords.value();
                for (int i = 0; i < pred.rows() && !ties; ++i) {
                    std::vector<double> dists;
                    for (int r : out.masked_ranks) {
                        auto c = ctx.octree.leaf_coord(r);
                        double d = 0;
                        for (int a2 = 0; a2 < 3; ++a2)
                            d += (pred.at(i, a2) - c[a2]) * (pred.at(i, a2) - c[a2]);
                        dists.push_back(d);
                    }
                    std::sort(dists.begin(), dists.end());
                    ties = dists.size() >= 2 && dists[1] - dists[0] < 1e-3;
                }
            }
            if (ties) continue;  // resample

            auto loss_value = [&]() {
                Tape tape;
                MaeOutput out = mae_forward(tape, store, mcfg, 0, ctx, mask);
                return mae_loss(tape, out, ctx.octree, 1.0).total.value().data[0];
            };
            Tape tape;
            MaeOutput out = mae_forward(tape, store, mcfg, 0, ctx, mask);
            Var loss = mae_loss(tape, out, ctx.octree, 1.0).total;
            tape.backward(loss, &store);
            auto report = gradcheck(store, loss_value);
            return check(report.max_rel_err < 1e-4, detail,
                         "mae gradcheck rel err " + std::to_string(report.max_rel_err) + " at " +
                             report.worst);
        }
        return check(false, detail, "could not find a tie-free mae instance in 8 attempts");
    }
}

// --- 6: masked-softmax / pad invariance ---------------------------------------

bool crit_pad_invariance(std::string& detail) {
    Rng rng(606);
    ParamStore store;
    init_block_params(store, "blk", 8, rng);
    for (int iter = 0; iter < 20; ++iter) {
        const int l = 1 + int(rng.next_below(12));
        Tensor x = Tensor::zeros({l, 8});
        for (double& v : x.data) v = rng.next_range(-2, 2);
        Tape tape;
        // exact-fit windows vs windows padded out to K = l + extra
        const int extra = 1 + int(rng.next_below(7));
        Var a = transformer_block(tape.constant(x), partition_windows(l, l),
                                  bind_block(tape, store, "blk"), 2);
        Var b = transformer_block(tape.constant(x), partition_windows(l, l + extra),
                                  bind_block(tape, store, "blk"), 2);
        for (std::size_t i = 0; i < a.value().data.size(); ++i)
            if (!check(std::abs(a.value().data[i] - b.value().data[i]) <= 1e-12, detail,
                       "pad slots changed a non-pad output"))
                return false;
        // attention mass to and from pads is exactly zero
        Tensor scores = Tensor::zeros({l + extra, l + extra});
        for (double& v : scores.data) v = rng.next_range(-3, 3);
        std::vector<std::uint8_t> valid(l + extra, 1);
        for (int s = l; s < l + extra; ++s) valid[s] = 0;
        Tensor attn = masked_softmax(tape.constant(scores), valid).value();
        for (int r = 0; r < l + extra; ++r)
            for (int c = l; c < l + extra; ++c)
                if (!check(attn.at(r, c) == 0.0, detail, "pad column received attention mass"))
                    return false;
    }
    return true;
}

// --- 7: encoder sees only visible tokens ---------------------------------------

bool crit_visible_only(std::string& detail) {
    RunConfig cfg = gradcheck_config();
    Mesh mesh = make_ellipsoid({1, 0.9, 1.1}, Mat3{1, 0, 0, 0, 1, 0, 0, 0, 1}, 4, 10);
    add_synthetic_features(mesh);
    BranchContext ctx = make_branch_context(mesh, cfg.branches[0]);
    ParamStore store;
    Rng rng(derive_seed(5, "init"));
    init_encoder_params(store, cfg, 2, rng);
    init_decoder_params(store, cfg, 2, rng);
    MaskSpec mask = make_mask(ctx.octree.leaf_count(), 0.6, 2024);

    BranchContext perturbed = ctx;
    Rng prng(9);
    for (int r : mask.masked) {
        const double cell = std::exp2(-ctx.octree.depth);
        auto g = ctx.octree.leaf_grid(r);
        for (int a = 0; a < 3; ++a)
            perturbed.octree.leaf_coords[3 * r + a] = (g[a] + prng.next_double()) * cell;
        for (int c = 0; c < 2; ++c)
            perturbed.octree.leaf_feats[std::size_t(r) * 2 + c] += prng.next_range(-9, 9);
    }
    Tape t1, t2;
    MaeOutput a = mae_forward(t1, store, cfg, 0, ctx, mask);
    MaeOutput b = mae_forward(t2, store, cfg, 0, perturbed, mask);
    return check(a.latents.value() == b.latents.value(), detail,
                 "perturbing masked payloads changed encoder latents");
}

// --- 8: toy MAE convergence -----------------------------------------------------

RunConfig convergence_config(std::uint64_t seed) {
    RunConfig cfg;
    cfg.seed = seed;
    cfg.branches.push_back(BranchConfig{RepPointKind::Vertices, 5, CurveKind::ZOrder});
    cfg.model.dim = 8;
    cfg.model.heads = 2;
    cfg.model.window = 32;
    cfg.model.schedule = {ScheduleEntry{false, 32, 1}, ScheduleEntry{true, 32, 4}};
    cfg.mae.mask_ratio = 0.6;
    cfg.mae.lambda = 1.0;
    cfg.mae.decoder_blocks = 2;
    cfg.optim.lr = 1e-3;
    cfg.optim.epochs = 200;
    cfg.optim.checkpoint_every = 1000000;  // no periodic checkpoints here
    return cfg;
}

bool crit_convergence(std::string& detail) {
    auto meshes = synth_meshes(SynthKind::Ellipsoids, 200, 814);
    std::vector<DatasetEntry> data;
    char stem[16];
    for (int i = 0; i < 200; ++i) {
        std::snprintf(stem, sizeof(stem), "e%03d", i);
        data.push_back(DatasetEntry{stem, std::move(meshes[i]), -1, {}});
    }
    RunConfig cfg = convergence_config(814);
    PretrainResult r = pretrain(data, cfg);
    const auto& h = r.history;
    if (!check(h.size() == 200, detail, "expected 200 epochs")) return false;
    if (!check(h.back().total <= 0.5 * h.front().total, detail,
               "final loss " + std::to_string(h.back().total) + " > half of epoch-1 loss " +
                   std::to_string(h.front().total)))
        return false;
    // 10-epoch moving average, strictly decreasing decade to decade
    std::vector<double> decades;
    for (int d = 0; d < 20; ++d) {
        double acc = 0;
        for (int e = 0; e < 10; ++e) acc += h[d * 10 + e].total;
        decades.push_back(acc / 10.0);
    }
    for (std::size_t d = 1; d < decades.size(); ++d)
        if (!check(decades[d] < decades[d - 1], detail,
                   "10-epoch moving average rose between decades " + std::to_string(d - 1) +
                       " and " + std::to_string(d)))
            return false;
    return true;
}

// --- 9: pretraining transfer ------------------------------------------------------

RunConfig transfer_config(std::uint64_t seed) {
    RunConfig cfg;
    cfg.seed = seed;
    cfg.branches.push_back(BranchConfig{RepPointKind::Vertices, 4, CurveKind::ZOrder});
    cfg.model.dim = 16;
    cfg.model.heads = 2;
    cfg.model.window = 32;
    cfg.model.schedule = {ScheduleEntry{false, 32, 1}, ScheduleEntry{true, 32, 4}};
    cfg.mae.decoder_blocks = 2;
    cfg.optim.epochs = 60;
    cfg.optim.checkpoint_every = 1000000;
    cfg.finetune.epochs = 40;
    cfg.finetune.lr = 6e-4;
    cfg.finetune.head_warmup_epochs = 3;  // identical protocol in both arms
    cfg.finetune.accuracy_threshold = 0.95;
    return cfg;
}

bool crit_transfer(std::string& detail) {
    auto all = [] {
        std::vector<int> labels;
        auto meshes = synth_meshes(SynthKind::BoxesVsSpheres, 150, 909, &labels);
        std::vector<DatasetEntry> data;
        char stem[16];
        for (int i = 0; i < 150; ++i) {
            std::snprintf(stem, sizeof(stem), "b%03d", i);
            data.push_back(DatasetEntry{stem, std::move(meshes[i]), labels[i], {}});
        }
        return data;
    }();
    auto train = std::vector<DatasetEntry>(all.begin(), all.begin() + 100);
    auto test = std::vector<DatasetEntry>(all.begin() + 100, all.end());

    int consistent = 0;
    for (std::uint64_t seed : {101ull, 202ull, 505ull}) {
        RunConfig cfg = transfer_config(seed);
        PretrainResult pre = pretrain(train, cfg);
        FinetuneResult ft_pre = finetune_classify_from(train, test, cfg, pre.params);
        FinetuneResult ft_rand = finetune_classify(train, test, cfg);
        const int e_pre = ft_pre.epochs_to_threshold;
        const int e_rand = ft_rand.epochs_to_threshold;
        std::fprintf(stderr, "    seed %llu: pretrained %d epochs, random %d epochs to 95%%\n",
                     static_cast<unsigned long long>(seed), e_pre, e_rand);
        if (!check(e_rand > 0, detail,
                   "random init never reached 95% test accuracy (seed " +
                       std::to_string(seed) + ")"))
            return false;
        if (!check(e_pre > 0, detail,
                   "pretrained init never reached 95% test accuracy (seed " +
                       std::to_string(seed) + ")"))
            return false;
        consistent += e_pre <= e_rand;
    }
    return check(consistent >= 2, detail,
                 "pretraining helped in only " + std::to_string(consistent) + "/3 seeds");
}

// --- 10: bit-exact determinism ----------------------------------------------------

bool crit_determinism(std::string& detail) {
    auto meshes = synth_meshes(SynthKind::Ellipsoids, 8, 515);
    std::vector<DatasetEntry> data;
    char stem[16];
    for (int i = 0; i < 8; ++i) {
        std::snprintf(stem, sizeof(stem), "d%03d", i);
        data.push_back(DatasetEntry{stem, std::move(meshes[i]), -1, {}});
    }
    RunConfig cfg = convergence_config(99);
    cfg.branches[0].depth = 4;
    cfg.optim.epochs = 5;
    cfg.optim.checkpoint_every = 5;

    const std::string dir_a = temp_dir("det_a"), dir_b = temp_dir("det_b");
    pretrain(data, cfg, dir_a);
    pretrain(data, cfg, dir_b);
    const bool same_csv =
        read_file(dir_a + "/loss_history.csv") == read_file(dir_b + "/loss_history.csv");
    const bool same_ckpt = read_file(dir_a + "/final.ckpt") == read_file(dir_b + "/final.ckpt");
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    if (!check(same_csv, detail, "loss-history CSVs differ between identical runs")) return false;
    return check(same_ckpt, detail, "final checkpoints differ between identical runs");
}

// --- 11: feature-embedding identity wiring ------------------------------------------

bool crit_embedding_identity(std::string& detail) {
    Mesh mesh = make_ellipsoid({1.1, 0.9, 1.0}, Mat3{1, 0, 0, 0, 1, 0, 0, 0, 1}, 5, 12);
    add_synthetic_features(mesh);
    BranchConfig branch{RepPointKind::Vertices, 4, CurveKind::ZOrder};
    BranchContext ctx = make_branch_context(mesh, branch);
    const int f = mesh.feature_dim();

    Tape tape;
    Var w = tape.constant(Tensor::identity(3 + f));
    Var b = tape.constant(Tensor::zeros({3 + f}));
    TokenSequence seq = project_tokens(tape, ctx.octree, w, b);
    const Tensor& e = seq.embeddings.value();
    for (int r = 0; r < ctx.octree.leaf_count(); ++r) {
        auto c = ctx.octree.leaf_coord(r);
        for (int a = 0; a < 3; ++a)
            if (!check(e.at(r, a) == c[a], detail, "coordinate columns not an exact copy"))
                return false;
        const double* feats = ctx.octree.leaf_feature_row(r);
        for (int j = 0; j < f; ++j)
            if (!check(e.at(r, 3 + j) == feats[j], detail, "feature columns not an exact copy"))
                return false;
    }
    return true;
}

struct Criterion {
    int id;
    const char* what;
    double budget_seconds;
    std::function<bool(std::string&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<Criterion> criteria = {
        {1, "space-filling-curve bijections and Hilbert adjacency at depth 3", 1.0, crit_curves},
        {2, "octree invariants under 1000 random point sets", 30.0, crit_octree_fuzz},
        {3, "window/dilation partitions cover every token exactly once", 10.0, crit_partitions},
        {4, "chamfer equals brute force on 500 random pairs", 10.0, crit_chamfer},
        {5, "finite-difference gradient checks (ops, encoder, MAE loss)", 120.0, crit_gradcheck},
        {6, "pad slots carry zero attention mass and never leak", 60.0, crit_pad_invariance},
        {7, "encoder latents are independent of masked payloads", 60.0, crit_visible_only},
        {8, "toy MAE pretraining converges (200 ellipsoids, 200 epochs)", 600.0,
         crit_convergence},
        {9, "MAE pretraining transfers to boxes-vs-spheres classification", 900.0,
         crit_transfer},
        {10, "identical config and seed reproduce CSV and checkpoint bytes", 120.0,
         crit_determinism},
        {11, "identity projection reproduces [coords; features] exactly", 10.0,
         crit_embedding_identity},
    };

    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failures = 0;
    for (auto& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        std::string detail;
        const auto start = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (seconds > c.budget_seconds) {
            ok = false;
            if (detail.empty())
                detail = "exceeded time budget of " + std::to_string(c.budget_seconds) + "s";
        }
        std::printf("%s  criterion %2d: %s  [%.1fs]%s%s\n", ok ? "PASS" : "FAIL", c.id, c.what,
                    seconds, detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        failures += !ok;
    }
    return failures == 0 ? 0 : 1;
}
