#include "octmesh/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "octmesh/config.hpp"
#include "octmesh/errors.hpp"

namespace octmesh {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kBranchStride = 8;  // mask-seed coordinate slots per mesh

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double scheduled_lr(const OptimConfig& optim, int epoch) {
    if (optim.lr_schedule == "cosine")
        return 0.5 * optim.lr * (1.0 + std::cos(kPi * double(epoch) / double(optim.epochs)));
    return optim.lr;
}

std::vector<BranchContext> make_contexts(const Mesh& mesh, const RunConfig& cfg,
                                         StructureCache* cache) {
    std::vector<BranchContext> out;
    for (const auto& b : cfg.branches) out.push_back(make_branch_context(mesh, b, cache));
    return out;
}

void write_resolved_config(const RunConfig& cfg, const std::string& out_dir) {
    std::ofstream out(out_dir + "/config.resolved.json");
    if (!out) throw DataError(out_dir + ": cannot write config snapshot");
    out << to_json(cfg).dump(2) << "\n";
}

nlohmann::json base_manifest(const RunConfig& cfg, int feature_dim, const char* kind) {
    return nlohmann::json{{"kind", kind},
                          {"config", to_json(cfg)},
                          {"config_hash", config_hash_hex(cfg)},
                          {"feature_dim", feature_dim},
                          {"rng", {{"root_seed", cfg.seed}}}};
}

// Copy values of identically named and shaped parameters (encoder surface)
// from `src` into `dst`.
void copy_matching_params(const ParamStore& src, ParamStore& dst) {
    for (const Param& p : src) {
        if (!dst.has(p.name)) continue;
        Param& q = dst.at(p.name);
        if (q.value.shape != p.value.shape)
            throw ConfigError("checkpoint parameter '" + p.name + "' has shape " +
                              p.value.shape_str() + ", model expects " + q.value.shape_str());
        q.value = p.value;
    }
}

void check_checkpoint_compat(const nlohmann::json& manifest, const RunConfig& cfg,
                             int feature_dim) {
    if (!manifest.contains("config"))
        throw ConfigError("checkpoint manifest lacks a config record");
    RunConfig saved = parse_config(manifest["config"]);
    if (saved.model.dim != cfg.model.dim)
        throw ConfigError("checkpoint model dim " + std::to_string(saved.model.dim) +
                          " != configured " + std::to_string(cfg.model.dim));
    if (manifest.contains("feature_dim") && manifest["feature_dim"].get<int>() != feature_dim)
        throw ConfigError("checkpoint feature dim " +
                          std::to_string(manifest["feature_dim"].get<int>()) +
                          " != dataset feature dim " + std::to_string(feature_dim));
    if (saved.branches.size() != cfg.branches.size())
        throw ConfigError("checkpoint branch count differs from configuration");
    for (std::size_t b = 0; b < cfg.branches.size(); ++b)
        if (saved.branches[b].points != cfg.branches[b].points ||
            saved.branches[b].depth != cfg.branches[b].depth ||
            saved.branches[b].curve != cfg.branches[b].curve)
            throw ConfigError("checkpoint branch " + std::to_string(b) +
                              " layout differs from configuration");
}

int dataset_feature_dim(const std::vector<DatasetEntry>& dataset) {
    if (dataset.empty()) throw DataError("dataset is empty");
    const int f = dataset[0].mesh.feature_dim();
    for (const auto& e : dataset)
        if (e.mesh.feature_dim() != f)
            throw DataError("inconsistent feature channel count across dataset: '" + e.stem +
                            "' has " + std::to_string(e.mesh.feature_dim()) + ", expected " +
                            std::to_string(f));
    return f;
}

}  // namespace

std::vector<DatasetEntry> load_dataset_dir(const std::string& dir) {
    if (!fs::is_directory(dir)) throw DataError(dir + ": not a directory");
    std::vector<std::string> stems;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".off") stems.push_back(entry.path().stem().string());
    std::sort(stems.begin(), stems.end());
    if (stems.empty()) throw DataError(dir + ": no .off meshes found");

    std::map<std::string, int> labels;
    if (fs::exists(dir + "/labels.csv")) {
        std::ifstream in(dir + "/labels.csv");
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto comma = line.find(',');
            if (comma == std::string::npos) throw DataError(dir + "/labels.csv: malformed row");
            labels[line.substr(0, comma)] = std::stoi(line.substr(comma + 1));
        }
    }

    std::vector<DatasetEntry> out;
    for (const auto& stem : stems) {
        DatasetEntry e;
        e.stem = stem;
        e.mesh = load_mesh(dir + "/" + stem + ".off", MeshFormat::Off);
        const std::string feat = dir + "/" + stem + ".features.csv";
        if (fs::exists(feat)) load_features(feat, e.mesh);
        auto it = labels.find(stem);
        if (it != labels.end()) e.label = it->second;
        const std::string vlab = dir + "/" + stem + ".labels.csv";
        if (fs::exists(vlab)) {
            std::ifstream in(vlab);
            std::string line;
            std::getline(in, line);  // header
            while (std::getline(in, line))
                if (!line.empty()) e.vertex_labels.push_back(std::stoi(line));
            if (int(e.vertex_labels.size()) != e.mesh.vertex_count())
                throw DataError(vlab + ": label count does not match vertex count");
        }
        out.push_back(std::move(e));
    }
    return out;
}

void write_loss_history_csv(const std::string& path, const std::vector<EpochLoss>& history,
                            int first_epoch) {
    std::ofstream out(path);
    if (!out) throw DataError(path + ": cannot open for writing");
    out << "epoch,total,chamfer,feat\n";
    for (std::size_t i = 0; i < history.size(); ++i)
        out << (first_epoch + int(i)) << "," << fmt_double(history[i].total) << ","
            << fmt_double(history[i].chamfer) << "," << fmt_double(history[i].feat) << "\n";
    if (!out) throw DataError(path + ": write failure");
}

PretrainResult pretrain(const std::vector<DatasetEntry>& dataset, const RunConfig& cfg,
                        const std::string& out_dir, const std::string& resume_ckpt) {
    const int feature_dim = dataset_feature_dim(dataset);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_resolved_config(cfg, out_dir);
    }

    StructureCache cache;
    std::vector<std::vector<BranchContext>> contexts;
    contexts.reserve(dataset.size());
    for (const auto& e : dataset) contexts.push_back(make_contexts(e.mesh, cfg, &cache));

    PretrainResult result;
    int start_epoch = 0;
    if (!resume_ckpt.empty()) {
        LoadedCheckpoint ck = load_checkpoint(resume_ckpt);
        if (ck.manifest.value("config_hash", "") != config_hash_hex(cfg))
            throw ConfigError("checkpoint was produced by a different configuration");
        result.params = std::move(ck.params);
        if (ck.has_opt) result.opt = std::move(ck.opt);
        start_epoch = ck.manifest.value("epoch", 0);
    } else {
        Rng init_rng(derive_seed(cfg.seed, "init"));
        init_encoder_params(result.params, cfg, feature_dim, init_rng);
        init_decoder_params(result.params, cfg, feature_dim, init_rng);
    }

    Tape tape;
    std::vector<int> order(dataset.size());
    for (int epoch = start_epoch; epoch < cfg.optim.epochs; ++epoch) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = int(i);
        Rng shuffle_rng(derive_seed(cfg.seed, "shuffle", std::uint64_t(epoch)));
        shuffle(order, shuffle_rng);
        const double lr = scheduled_lr(cfg.optim, epoch);

        EpochLoss epoch_loss;
        for (int mesh_idx : order) {
            tape.clear();
            Var total;
            for (std::size_t b = 0; b < cfg.branches.size(); ++b) {
                const BranchContext& ctx = contexts[mesh_idx][b];
                // per-mesh mask, constant across epochs: with lr 0 the loss
                // history is exactly constant
                MaskSpec mask = make_mask(
                    ctx.octree.leaf_count(), cfg.mae.mask_ratio,
                    derive_seed(cfg.seed, "mask",
                                std::uint64_t(mesh_idx) * kBranchStride + b));
                MaeOutput out = mae_forward(tape, result.params, cfg, int(b), ctx, mask);
                MaeLossParts parts = mae_loss(tape, out, ctx.octree, cfg.mae.lambda);
                epoch_loss.chamfer += parts.chamfer_value;
                epoch_loss.feat += parts.feat_value;
                total = total.valid() ? add(total, parts.total) : parts.total;
            }
            epoch_loss.total += total.value().data[0];
            tape.backward(total, &result.params);
            if (cfg.optim.algo == "adam")
                adam_step(result.params, result.opt, lr, cfg.optim.beta1, cfg.optim.beta2,
                          cfg.optim.eps, cfg.optim.weight_decay);
            else
                sgd_step(result.params, lr, cfg.optim.weight_decay);
        }
        const double inv = 1.0 / double(dataset.size());
        epoch_loss.total *= inv;
        epoch_loss.chamfer *= inv;
        epoch_loss.feat *= inv;
        result.history.push_back(epoch_loss);

        if (!out_dir.empty()) {
            const bool last = epoch + 1 == cfg.optim.epochs;
            if ((epoch + 1) % cfg.optim.checkpoint_every == 0 || last) {
                nlohmann::json man = base_manifest(cfg, feature_dim, "pretrain");
                man["epoch"] = epoch + 1;
                char name[40];
                std::snprintf(name, sizeof(name), "/epoch_%04d.ckpt", epoch + 1);
                save_checkpoint(out_dir + name, result.params, &result.opt, man);
                if (last) save_checkpoint(out_dir + "/final.ckpt", result.params, &result.opt, man);
                write_loss_history_csv(out_dir + "/loss_history.csv", result.history,
                                       start_epoch + 1);
            }
        }
    }
    if (!out_dir.empty())
        write_loss_history_csv(out_dir + "/loss_history.csv", result.history, start_epoch + 1);
    return result;
}

namespace {

struct LabeledContexts {
    std::vector<std::vector<BranchContext>> contexts;
    std::vector<int> labels;
};

LabeledContexts prepare_classify(const std::vector<DatasetEntry>& entries, const RunConfig& cfg,
                                 StructureCache* cache) {
    LabeledContexts out;
    for (const auto& e : entries) {
        if (e.label < 0) throw DataError("mesh '" + e.stem + "' has no class label");
        out.contexts.push_back(make_contexts(e.mesh, cfg, cache));
        out.labels.push_back(e.label);
    }
    return out;
}

int predict_class(Tape& tape, ParamStore& store, const RunConfig& cfg,
                  const std::vector<BranchContext>& ctxs) {
    tape.clear();
    const Tensor& logits = classify_logits(tape, store, cfg, ctxs).value();
    int best = 0;
    for (int c = 1; c < logits.cols(); ++c)
        if (logits.data[c] > logits.data[best]) best = c;
    return best;
}

double accuracy_of(Tape& tape, ParamStore& store, const RunConfig& cfg, LabeledContexts& data,
                   std::vector<int>* predictions = nullptr) {
    int hits = 0;
    for (std::size_t i = 0; i < data.contexts.size(); ++i) {
        const int pred = predict_class(tape, store, cfg, data.contexts[i]);
        if (predictions) predictions->push_back(pred);
        hits += pred == data.labels[i];
    }
    return double(hits) / double(data.contexts.size());
}

FinetuneResult finetune_impl(const std::vector<DatasetEntry>& train,
                             const std::vector<DatasetEntry>& test, const RunConfig& cfg,
                             const std::string& init_ckpt, const ParamStore* init_params,
                             const std::string& out_dir, bool segment_task) {
    const int feature_dim = dataset_feature_dim(train);
    int n_classes = 0;
    if (segment_task) {
        for (const auto& e : train) {
            if (e.vertex_labels.empty())
                throw DataError("mesh '" + e.stem + "' has no vertex labels");
            for (int l : e.vertex_labels) n_classes = std::max(n_classes, l + 1);
        }
        for (const auto& e : test)
            for (int l : e.vertex_labels) n_classes = std::max(n_classes, l + 1);
    } else {
        for (const auto& e : train) n_classes = std::max(n_classes, e.label + 1);
        for (const auto& e : test) n_classes = std::max(n_classes, e.label + 1);
    }
    if (n_classes < 2) throw DataError("need at least two classes, found " +
                                       std::to_string(n_classes));

    FinetuneResult result;
    Rng init_rng(derive_seed(cfg.seed, "init"));
    init_encoder_params(result.params, cfg, feature_dim, init_rng);
    Rng head_rng(derive_seed(cfg.seed, "head"));
    init_head_params(result.params, cfg, n_classes, head_rng);

    if (!init_ckpt.empty()) {
        LoadedCheckpoint ck = load_checkpoint(init_ckpt);
        check_checkpoint_compat(ck.manifest, cfg, feature_dim);
        copy_matching_params(ck.params, result.params);
    } else if (init_params) {
        copy_matching_params(*init_params, result.params);
    }
    auto set_encoder_frozen = [&](bool frozen) {
        result.params.set_requires_grad_prefix("b", !frozen);
        if (result.params.has("fusion.alpha"))
            result.params.at("fusion.alpha").requires_grad = !frozen;
    };
    if (cfg.finetune.freeze_encoder || cfg.finetune.head_warmup_epochs > 0)
        set_encoder_frozen(true);

    StructureCache cache;
    LabeledContexts train_data, test_data;
    if (segment_task) {
        for (const auto& e : train)
            train_data.contexts.push_back({make_branch_context(e.mesh, cfg.branches[0], &cache)});
        for (const auto& e : test)
            test_data.contexts.push_back({make_branch_context(e.mesh, cfg.branches[0], &cache)});
    } else {
        train_data = prepare_classify(train, cfg, &cache);
        test_data = prepare_classify(test, cfg, &cache);
    }

    AdamState opt;
    Tape tape;
    std::vector<int> order(train.size());

    // Frozen encoder: features are constant, so encode each mesh once and
    // train the head on cached fused vectors (identical math, fewer flops).
    const bool cache_features = cfg.finetune.freeze_encoder && !segment_task;
    std::vector<Tensor> train_feats, test_feats;
    if (cache_features) {
        auto extract = [&](LabeledContexts& data, std::vector<Tensor>& out) {
            for (auto& ctxs : data.contexts) {
                tape.clear();
                std::vector<Var> pooled;
                for (std::size_t b = 0; b < ctxs.size(); ++b)
                    pooled.push_back(
                        pool_tokens(encode_branch(tape, result.params, cfg, int(b), ctxs[b])));
                out.push_back(fuse_branches(tape, result.params, cfg, pooled).value());
            }
        };
        extract(train_data, train_feats);
        extract(test_data, test_feats);
    }
    auto head_logits = [&](const Tensor& fused) {
        return linear(tape.constant(fused), tape.param(result.params.at("head.W")),
                      tape.param(result.params.at("head.b")));
    };
    auto cached_accuracy = [&](const std::vector<Tensor>& feats, const std::vector<int>& labels,
                               std::vector<int>* predictions) {
        int hits = 0;
        for (std::size_t i = 0; i < feats.size(); ++i) {
            tape.clear();
            const Tensor& logits = head_logits(feats[i]).value();
            int best = 0;
            for (int c = 1; c < logits.cols(); ++c)
                if (logits.data[c] > logits.data[best]) best = c;
            if (predictions) predictions->push_back(best);
            hits += best == labels[i];
        }
        return double(hits) / double(feats.size());
    };

    auto vertex_accuracy = [&](const std::vector<DatasetEntry>& entries, LabeledContexts& data,
                               std::vector<int>* preds, std::vector<int>* truths) {
        long hits = 0, total = 0;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            tape.clear();
            const Tensor& logits =
                segment_logits(tape, result.params, cfg, data.contexts[i][0]).value();
            for (int v = 0; v < logits.rows(); ++v) {
                int best = 0;
                for (int c = 1; c < logits.cols(); ++c)
                    if (logits.at(v, c) > logits.at(v, best)) best = c;
                hits += best == entries[i].vertex_labels[v];
                ++total;
                if (preds) preds->push_back(best);
                if (truths) truths->push_back(entries[i].vertex_labels[v]);
            }
        }
        return double(hits) / double(total);
    };

    for (int epoch = 0; epoch < cfg.finetune.epochs; ++epoch) {
        if (!cfg.finetune.freeze_encoder && cfg.finetune.head_warmup_epochs > 0 &&
            epoch == cfg.finetune.head_warmup_epochs)
            set_encoder_frozen(false);
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = int(i);
        Rng shuffle_rng(derive_seed(cfg.seed, "ft_shuffle", std::uint64_t(epoch)));
        shuffle(order, shuffle_rng);
        for (int idx : order) {
            tape.clear();
            Var loss;
            if (segment_task) {
                Var logits = segment_logits(tape, result.params, cfg, train_data.contexts[idx][0]);
                loss = softmax_cross_entropy_rows(logits, train[idx].vertex_labels);
            } else if (cache_features) {
                loss = softmax_cross_entropy(head_logits(train_feats[idx]),
                                             train_data.labels[idx]);
            } else {
                Var logits = classify_logits(tape, result.params, cfg, train_data.contexts[idx]);
                loss = softmax_cross_entropy(logits, train_data.labels[idx]);
            }
            tape.backward(loss, &result.params);
            adam_step(result.params, opt, cfg.finetune.lr, cfg.optim.beta1, cfg.optim.beta2,
                      cfg.optim.eps, cfg.optim.weight_decay);
        }
        double train_acc, test_acc;
        if (segment_task) {
            train_acc = vertex_accuracy(train, train_data, nullptr, nullptr);
            test_acc = vertex_accuracy(test, test_data, nullptr, nullptr);
        } else if (cache_features) {
            train_acc = cached_accuracy(train_feats, train_data.labels, nullptr);
            test_acc = cached_accuracy(test_feats, test_data.labels, nullptr);
        } else {
            train_acc = accuracy_of(tape, result.params, cfg, train_data);
            test_acc = accuracy_of(tape, result.params, cfg, test_data);
        }
        result.train_accuracy.push_back(train_acc);
        result.test_accuracy.push_back(test_acc);
        if (result.epochs_to_threshold < 0 && test_acc >= cfg.finetune.accuracy_threshold)
            result.epochs_to_threshold = epoch + 1;
    }

    // final test metrics
    if (segment_task) {
        std::vector<int> preds, truths;
        result.test_mean_iou = 0.0;
        vertex_accuracy(test, test_data, &preds, &truths);
        result.test_mean_iou = mean_iou(preds, truths, n_classes);
    } else {
        std::vector<int> preds;
        if (cache_features)
            cached_accuracy(test_feats, test_data.labels, &preds);
        else
            accuracy_of(tape, result.params, cfg, test_data, &preds);
        if (n_classes == 2) result.test_metrics = binary_metrics(preds, test_data.labels);
        result.test_metrics.accuracy = result.test_accuracy.back();
    }

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_resolved_config(cfg, out_dir);
        std::ofstream out(out_dir + "/metrics.csv");
        out << "epoch,train_accuracy,test_accuracy\n";
        for (std::size_t i = 0; i < result.train_accuracy.size(); ++i)
            out << (i + 1) << "," << fmt_double(result.train_accuracy[i]) << ","
                << fmt_double(result.test_accuracy[i]) << "\n";
        nlohmann::json man = base_manifest(cfg, feature_dim, "finetune");
        man["n_classes"] = n_classes;
        save_checkpoint(out_dir + "/finetuned.ckpt", result.params, nullptr, man);
    }
    return result;
}

}  // namespace

FinetuneResult finetune_classify(const std::vector<DatasetEntry>& train,
                                 const std::vector<DatasetEntry>& test, const RunConfig& cfg,
                                 const std::string& init_ckpt, const std::string& out_dir) {
    return finetune_impl(train, test, cfg, init_ckpt, nullptr, out_dir, false);
}

FinetuneResult finetune_segment(const std::vector<DatasetEntry>& train,
                                const std::vector<DatasetEntry>& test, const RunConfig& cfg,
                                const std::string& init_ckpt, const std::string& out_dir) {
    return finetune_impl(train, test, cfg, init_ckpt, nullptr, out_dir, true);
}

FinetuneResult finetune_classify_from(const std::vector<DatasetEntry>& train,
                                      const std::vector<DatasetEntry>& test,
                                      const RunConfig& cfg, const ParamStore& init_params,
                                      const std::string& out_dir) {
    return finetune_impl(train, test, cfg, "", &init_params, out_dir, false);
}

std::pair<std::vector<DatasetEntry>, std::vector<DatasetEntry>> split_dataset(
    std::vector<DatasetEntry> all, int train_count) {
    std::sort(all.begin(), all.end(),
              [](const DatasetEntry& a, const DatasetEntry& b) { return a.stem < b.stem; });
    const int n = static_cast<int>(all.size());
    int k = train_count < 0 ? (2 * n + 2) / 3 : train_count;
    if (k < 1 || k >= n)
        throw ConfigError("train split " + std::to_string(k) + " out of range for " +
                          std::to_string(n) + " meshes");
    std::vector<DatasetEntry> train(all.begin(), all.begin() + k);
    std::vector<DatasetEntry> test(all.begin() + k, all.end());
    return {std::move(train), std::move(test)};
}

std::vector<AblateResult> ablate(const std::vector<DatasetEntry>& train,
                                 const std::vector<DatasetEntry>& test, const RunConfig& base,
                                 const std::set<std::string>& toggles,
                                 const std::string& out_dir, int threads) {
    struct Variant {
        std::string name;
        RunConfig cfg;
        bool use_mae;
    };
    std::vector<Variant> variants;
    variants.push_back({"base", base, true});
    for (const std::string& t : toggles) {
        RunConfig cfg = base;
        if (t == "cpe") {
            cfg.model.cpe = false;
            variants.push_back({"no_cpe", cfg, true});
        } else if (t == "curve") {
            for (auto& b : cfg.branches)
                b.curve = b.curve == CurveKind::ZOrder ? CurveKind::Hilbert : CurveKind::ZOrder;
            variants.push_back({"flip_curve", cfg, true});
        } else if (t == "branches") {
            if (cfg.branches.size() > 1) cfg.branches.resize(1);
            variants.push_back({"single_branch", cfg, true});
        } else if (t == "mae") {
            variants.push_back({"no_mae", cfg, false});
        } else {
            throw ConfigError("unknown ablation toggle '" + t + "'");
        }
    }

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);  // before worker threads race on it
        write_resolved_config(base, out_dir);
    }
    std::vector<AblateResult> results(variants.size());
    auto run_one = [&](std::size_t i) {
        const Variant& v = variants[i];
        const std::string run_dir =
            out_dir.empty() ? "" : out_dir + "/run_" + v.name;
        ParamStore pretrained;
        const ParamStore* init = nullptr;
        if (v.use_mae) {
            PretrainResult pr = pretrain(train, v.cfg, run_dir.empty() ? "" : run_dir + "/mae");
            pretrained = std::move(pr.params);
            init = &pretrained;
        }
        FinetuneResult ft = finetune_impl(train, test, v.cfg, "", init,
                                          run_dir.empty() ? "" : run_dir + "/cls", false);
        results[i] =
            AblateResult{v.name, ft.test_accuracy.back(), ft.epochs_to_threshold};
    };

    if (threads <= 1) {
        for (std::size_t i = 0; i < variants.size(); ++i) run_one(i);
    } else {
        std::vector<std::thread> pool;
        std::size_t next = 0;
        while (next < variants.size()) {
            pool.clear();
            for (int t = 0; t < threads && next < variants.size(); ++t, ++next)
                pool.emplace_back(run_one, next);
            for (auto& th : pool) th.join();
        }
    }

    if (!out_dir.empty()) {
        std::ofstream csv(out_dir + "/ablation.csv");
        csv << "run,test_accuracy,epochs_to_threshold\n";
        for (const auto& r : results)
            csv << r.name << "," << fmt_double(r.test_accuracy) << "," << r.epochs_to_threshold
                << "\n";
        std::ofstream md(out_dir + "/ablation.md");
        md << "| run | test accuracy | epochs to threshold |\n|---|---|---|\n";
        for (const auto& r : results) {
            char acc[32];
            std::snprintf(acc, sizeof(acc), "%.3f", r.test_accuracy);
            md << "| " << r.name << " | " << acc << " | " << r.epochs_to_threshold << " |\n";
        }
    }
    return results;
}

}  // namespace octmesh
