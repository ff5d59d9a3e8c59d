// octmesh: simplex-aware octree tokenization of meshes, windowed-attention
// encoding, and masked-autoencoder pretraining, from the command line.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "octmesh/config.hpp"
#include "octmesh/errors.hpp"
#include "octmesh/synth.hpp"
#include "octmesh/train.hpp"

using namespace octmesh;
using nlohmann::json;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

RunConfig resolve_config(const GlobalOpts& g) {
    RunConfig cfg = g.config_path.empty() ? default_config() : load_config_file(g.config_path);
    if (g.seed) cfg.seed = *g.seed;
    if (g.threads) cfg.threads = *g.threads;
    return cfg;
}

MeshFormat format_for(const std::string& path, const std::string& forced) {
    if (forced == "off") return MeshFormat::Off;
    if (forced == "tetgen") return MeshFormat::Tetgen;
    if (!forced.empty()) throw ConfigError("unknown format '" + forced + "'");
    const auto ext = std::filesystem::path(path).extension().string();
    if (ext == ".off") return MeshFormat::Off;
    if (ext == ".node" || ext == ".ele" || ext.empty()) return MeshFormat::Tetgen;
    throw ConfigError("cannot infer mesh format from '" + path + "'; pass --format");
}

Mesh load_input_mesh(const std::string& path, const std::string& format,
                     const std::string& features) {
    Mesh mesh = load_mesh(path, format_for(path, format));
    if (!features.empty()) load_features(features, mesh);
    return mesh;
}

json octree_stats(const Octree& tree) {
    std::map<int, int> histogram;  // points-per-leaf -> leaf count
    for (int c : tree.leaf_counts) histogram[c] += 1;
    json hist = json::object();
    for (const auto& [count, leaves] : histogram) hist[std::to_string(count)] = leaves;
    return json{{"depth", tree.depth},
                {"curve", to_string(tree.curve)},
                {"leaf_count", tree.leaf_count()},
                {"point_count", tree.point_count()},
                {"occupancy_histogram", hist},
                {"bbox",
                 {{"lo", {tree.bbox.lo[0], tree.bbox.lo[1], tree.bbox.lo[2]}},
                  {"hi", {tree.bbox.hi[0], tree.bbox.hi[1], tree.bbox.hi[2]}}}}};
}

int run_synth(const GlobalOpts& g, const std::string& kind, int n, const std::string& out) {
    const std::uint64_t seed = g.seed.value_or(42);
    auto items = synth_dataset(synth_kind_from_string(kind), n, seed, out);
    std::cout << json{{"written", items.size()}, {"dir", out}}.dump(2) << "\n";
    return 0;
}

int run_build_octree(const std::string& input, const std::string& format,
                     const std::string& features, int depth, const std::string& curve,
                     const std::string& points) {
    Mesh mesh = load_input_mesh(input, format, features);
    RepPointSet rp = rep_points(mesh, rep_point_kind_from_string(points));
    Octree tree = build_octree(rp, depth, curve_from_string(curve));
    std::cout << octree_stats(tree).dump(2) << "\n";
    return 0;
}

int run_stats(const std::string& input, const std::string& format, const std::string& features,
              int depth, const std::string& curve, const std::string& points) {
    Mesh mesh = load_input_mesh(input, format, features);
    json j{{"vertices", mesh.vertex_count()},
           {"simplices", mesh.simplex_count()},
           {"simplex_order", mesh.simplex_order},
           {"feature_channels", mesh.feature_names}};
    if (depth > 0) {
        RepPointSet rp = rep_points(mesh, rep_point_kind_from_string(points));
        j["octree"] = octree_stats(build_octree(rp, depth, curve_from_string(curve)));
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_pretrain(const GlobalOpts& g, const std::string& data, const std::string& out,
                 const std::string& resume) {
    RunConfig cfg = resolve_config(g);
    auto dataset = load_dataset_dir(data);
    PretrainResult result = pretrain(dataset, cfg, out, resume);
    json j{{"epochs", result.history.size()},
           {"final_loss", result.history.empty() ? 0.0 : result.history.back().total},
           {"out", out}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_finetune(const GlobalOpts& g, const std::string& task, const std::string& ckpt,
                 bool random_init, const std::string& data, const std::string& out,
                 int train_count) {
    RunConfig cfg = resolve_config(g);
    if (train_count != 0) cfg.finetune.train_count = train_count;
    auto [train, test] = split_dataset(load_dataset_dir(data), cfg.finetune.train_count);
    const std::string init = random_init ? "" : ckpt;
    FinetuneResult result;
    if (task == "classify")
        result = finetune_classify(train, test, cfg, init, out);
    else if (task == "segment")
        result = finetune_segment(train, test, cfg, init, out);
    else
        throw ConfigError("task must be classify or segment, got '" + task + "'");

    json j{{"task", task},
           {"train_meshes", train.size()},
           {"test_meshes", test.size()},
           {"test_accuracy", result.test_accuracy.back()},
           {"epochs_to_threshold", result.epochs_to_threshold}};
    if (task == "classify") {
        j["sensitivity"] = result.test_metrics.sensitivity
                               ? json(*result.test_metrics.sensitivity)
                               : json(nullptr);
        j["specificity"] = result.test_metrics.specificity
                               ? json(*result.test_metrics.specificity)
                               : json(nullptr);
    } else {
        j["mean_iou"] = result.test_mean_iou;
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_reconstruct(const GlobalOpts& g, const std::string& ckpt, const std::string& input,
                    const std::string& format, const std::string& features, double mask_ratio,
                    const std::string& export_path) {
    LoadedCheckpoint ck = load_checkpoint(ckpt);
    if (!ck.manifest.contains("config"))
        throw ConfigError(ckpt + ": checkpoint manifest lacks a config record");
    RunConfig cfg = parse_config(ck.manifest["config"]);
    if (g.seed) cfg.seed = *g.seed;

    Mesh mesh = load_input_mesh(input, format, features);
    if (mesh.feature_dim() != ck.manifest.value("feature_dim", mesh.feature_dim()))
        throw ConfigError("mesh feature channels do not match the checkpoint");
    BranchContext ctx = make_branch_context(mesh, cfg.branches[0]);
    MaskSpec mask = make_mask(ctx.octree.leaf_count(), mask_ratio,
                              derive_seed(cfg.seed, "mask", 0, 0));

    Tape tape;
    MaeOutput out = mae_forward(tape, ck.params, cfg, 0, ctx, mask);

    // visible tokens in gray (the masked input), reconstructions in red
    std::vector<Vec3> points;
    std::vector<std::array<std::uint8_t, 3>> colors;
    auto to_world = [&](Vec3 u) {
        Vec3 w;
        for (int a = 0; a < 3; ++a)
            w[a] = ctx.octree.bbox.lo[a] + u[a] * (ctx.octree.bbox.hi[a] - ctx.octree.bbox.lo[a]);
        return w;
    };
    for (int r : mask.visible()) {
        points.push_back(to_world(ctx.octree.leaf_coord(r)));
        colors.push_back({128, 128, 128});
    }
    if (!mask.masked.empty()) {
        const Tensor& pred = out.pred_coords.value();
        for (int i = 0; i < pred.rows(); ++i) {
            points.push_back(to_world({pred.at(i, 0), pred.at(i, 1), pred.at(i, 2)}));
            colors.push_back({220, 30, 30});
        }
    }
    save_points_ply(points, &colors, export_path);
    std::cout << json{{"visible", mask.total - mask.masked_count()},
                      {"reconstructed", mask.masked_count()},
                      {"export", export_path}}
                     .dump(2)
              << "\n";
    return 0;
}

int run_ablate(const GlobalOpts& g, const std::string& data, const std::string& out,
               const std::string& toggles_csv) {
    RunConfig cfg = resolve_config(g);
    std::set<std::string> toggles;
    std::stringstream ss(toggles_csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) toggles.insert(tok);
    auto [train, test] = split_dataset(load_dataset_dir(data), cfg.finetune.train_count);
    auto results = ablate(train, test, cfg, toggles, out, cfg.threads);
    json rows = json::array();
    for (const auto& r : results)
        rows.push_back({{"run", r.name},
                        {"test_accuracy", r.test_accuracy},
                        {"epochs_to_threshold", r.epochs_to_threshold}});
    std::cout << rows.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"octree mesh tokenization, attention encoding and MAE pretraining"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOpts g;
    std::uint64_t seed_opt = 0;
    int threads_opt = 0;
    app.add_option("--config", g.config_path, "run configuration JSON")->expected(1);
    auto* seed_flag = app.add_option("--seed", seed_opt, "root random seed");
    auto* threads_flag = app.add_option("--threads", threads_opt, "worker threads for sweeps");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic mesh dataset");
    std::string synth_kind = "ellipsoids", synth_out = "data";
    int synth_n = 10;
    synth->add_option("--kind", synth_kind, "ellipsoids | boxes-vs-spheres");
    synth->add_option("--n", synth_n, "mesh count")->required();
    synth->add_option("--out", synth_out, "output directory")->required();

    // shared mesh-input options
    std::string input, format, features, curve = "zorder", points = "vertices";
    int depth = 6;
    auto add_mesh_opts = [&](CLI::App* cmd, bool require_depth) {
        cmd->add_option("--input", input, "mesh file (.off or TetGen .node)")->required();
        cmd->add_option("--format", format, "off | tetgen (default: by extension)");
        cmd->add_option("--features", features, "per-vertex feature CSV");
        auto* d = cmd->add_option("--depth", depth, "octree depth");
        if (require_depth) d->required();
        cmd->add_option("--curve", curve, "zorder | hilbert");
        cmd->add_option("--points", points,
                        "vertices | edge-midpoints | face-centroids | cell-centroids");
    };
    auto* build = app.add_subcommand("build-octree", "build an octree and print stats JSON");
    add_mesh_opts(build, true);
    auto* stats = app.add_subcommand("stats", "mesh summary (octree stats with --depth)");
    depth = 0;
    add_mesh_opts(stats, false);

    // pretrain
    auto* pre = app.add_subcommand("pretrain", "masked-autoencoder pretraining");
    std::string pre_data, pre_out = "ckpt", pre_resume;
    pre->add_option("--data", pre_data, "dataset directory")->required();
    pre->add_option("--out", pre_out, "output directory");
    pre->add_option("--resume", pre_resume, "checkpoint to continue from");

    // finetune
    auto* fine = app.add_subcommand("finetune", "train a task head on labeled meshes");
    std::string fine_task = "classify", fine_ckpt, fine_data, fine_out = "finetune";
    bool fine_random = false;
    int fine_train_count = 0;
    fine->add_option("--task", fine_task, "classify | segment");
    fine->add_option("--ckpt", fine_ckpt, "pretrained checkpoint");
    fine->add_flag("--random-init", fine_random, "skip checkpoint loading");
    fine->add_option("--data", fine_data, "dataset directory")->required();
    fine->add_option("--out", fine_out, "output directory");
    fine->add_option("--train-count", fine_train_count, "leading stems used for training");

    // reconstruct
    auto* rec = app.add_subcommand("reconstruct", "export masked-input/reconstruction PLY");
    std::string rec_ckpt, rec_input, rec_format, rec_features, rec_export = "recon.ply";
    double rec_ratio = 0.6;
    rec->add_option("--ckpt", rec_ckpt, "pretrained checkpoint")->required();
    rec->add_option("--input", rec_input, "mesh file")->required();
    rec->add_option("--format", rec_format, "off | tetgen");
    rec->add_option("--features", rec_features, "per-vertex feature CSV");
    rec->add_option("--mask-ratio", rec_ratio, "fraction of tokens to hide");
    rec->add_option("--export", rec_export, "output PLY path");

    // ablate
    auto* abl = app.add_subcommand("ablate", "one-factor-at-a-time configuration sweep");
    std::string abl_data, abl_out = "ablation", abl_toggles = "cpe,curve,branches,mae";
    abl->add_option("--data", abl_data, "labeled dataset directory")->required();
    abl->add_option("--out", abl_out, "output directory");
    abl->add_option("--toggles", abl_toggles, "subset of cpe,curve,branches,mae");

    CLI11_PARSE(app, argc, argv);
    if (*seed_flag) g.seed = seed_opt;
    if (*threads_flag) g.threads = threads_opt;

    try {
        if (app.got_subcommand(synth)) return run_synth(g, synth_kind, synth_n, synth_out);
        if (app.got_subcommand(build))
            return run_build_octree(input, format, features, depth, curve, points);
        if (app.got_subcommand(stats))
            return run_stats(input, format, features, depth, curve, points);
        if (app.got_subcommand(pre)) return run_pretrain(g, pre_data, pre_out, pre_resume);
        if (app.got_subcommand(fine))
            return run_finetune(g, fine_task, fine_ckpt, fine_random, fine_data, fine_out,
                                fine_train_count);
        if (app.got_subcommand(rec))
            return run_reconstruct(g, rec_ckpt, rec_input, rec_format, rec_features, rec_ratio,
                                   rec_export);
        if (app.got_subcommand(abl)) return run_ablate(g, abl_data, abl_out, abl_toggles);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
