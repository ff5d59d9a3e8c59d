#pragma once

#include <set>
#include <string>
#include <vector>

#include "octmesh/mae.hpp"
#include "octmesh/metrics.hpp"
#include "octmesh/optim.hpp"

namespace octmesh {

struct DatasetEntry {
    std::string stem;
    Mesh mesh;
    int label = -1;                  // classification label, -1 when absent
    std::vector<int> vertex_labels;  // segmentation labels, empty when absent
};

// Every *.off in `dir` (sorted by name), with <stem>.features.csv attached
// when present, labels from labels.csv ("mesh,label" rows) and per-vertex
// labels from <stem>.labels.csv when present.
std::vector<DatasetEntry> load_dataset_dir(const std::string& dir);

struct EpochLoss {
    double total = 0, chamfer = 0, feat = 0;
};

struct PretrainResult {
    std::vector<EpochLoss> history;  // one row per epoch run in this call
    ParamStore params;
    AdamState opt;
};

// Masked-autoencoder pretraining over all branches of every mesh. out_dir ""
// suppresses file output; otherwise loss_history.csv, periodic checkpoints,
// final.ckpt and config.resolved.json are written there. resume_ckpt
// continues a run bit-exactly from its recorded epoch.
PretrainResult pretrain(const std::vector<DatasetEntry>& dataset, const RunConfig& cfg,
                        const std::string& out_dir = "", const std::string& resume_ckpt = "");

struct FinetuneResult {
    std::vector<double> train_accuracy, test_accuracy;  // per epoch
    int epochs_to_threshold = -1;                       // 1-based; -1 = never reached
    BinaryMetrics test_metrics;                         // classification
    double test_mean_iou = 0.0;                         // segmentation
    ParamStore params;
};

// Cross-entropy training of encoder + fresh classification head.
// init_ckpt "" = random initialization; otherwise encoder weights are copied
// from the checkpoint (model dim, feature dim and branch layout must match).
FinetuneResult finetune_classify(const std::vector<DatasetEntry>& train,
                                 const std::vector<DatasetEntry>& test, const RunConfig& cfg,
                                 const std::string& init_ckpt = "",
                                 const std::string& out_dir = "");

// Per-vertex cross-entropy via branch 0; accuracy fields hold vertex accuracy.
FinetuneResult finetune_segment(const std::vector<DatasetEntry>& train,
                                const std::vector<DatasetEntry>& test, const RunConfig& cfg,
                                const std::string& init_ckpt = "",
                                const std::string& out_dir = "");

// Like finetune_classify but seeded from in-memory parameters (e.g. a
// pretraining result) instead of a checkpoint file.
FinetuneResult finetune_classify_from(const std::vector<DatasetEntry>& train,
                                      const std::vector<DatasetEntry>& test,
                                      const RunConfig& cfg, const ParamStore& init_params,
                                      const std::string& out_dir = "");

// Split by sorted stem order: first `train_count` entries train, rest test
// (train_count < 0: ceil(2n/3)).
std::pair<std::vector<DatasetEntry>, std::vector<DatasetEntry>> split_dataset(
    std::vector<DatasetEntry> all, int train_count);

struct AblateResult {
    std::string name;
    double test_accuracy = 0.0;
    int epochs_to_threshold = -1;
};

// One-factor-at-a-time sweep: the base configuration plus one variant per
// toggle in {"cpe", "curve", "branches", "mae"}, matched seeds. Each run
// pretrains on the train split (unless the variant disables it) and
// finetunes. Writes ablation.csv and ablation.md when out_dir is non-empty.
std::vector<AblateResult> ablate(const std::vector<DatasetEntry>& train,
                                 const std::vector<DatasetEntry>& test, const RunConfig& base,
                                 const std::set<std::string>& toggles,
                                 const std::string& out_dir = "", int threads = 1);

// Numbers formatted with %.17g so reruns are byte-identical.
void write_loss_history_csv(const std::string& path, const std::vector<EpochLoss>& history,
                            int first_epoch = 1);

}  // namespace octmesh
