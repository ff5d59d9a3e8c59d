#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "octmesh/curves.hpp"
#include "octmesh/rep_points.hpp"

namespace octmesh {

struct BranchConfig {
    RepPointKind points = RepPointKind::Vertices;
    int depth = 6;
    CurveKind curve = CurveKind::ZOrder;
};

struct ScheduleEntry {
    bool dilated = false;
    int window = 32;
    int stride = 1;  // > 1 only for dilated entries
};

struct ModelConfig {
    int dim = 64;
    int heads = 4;
    int window = 32;                      // default K for schedule entries
    std::vector<ScheduleEntry> schedule;  // one entry per encoder block
    bool cpe = true;                      // conditional positional encoding on/off
    bool cpe_per_block = false;
    bool fusion = true;  // learned softmax weights; otherwise plain branch average
};

struct MaeConfig {
    double mask_ratio = 0.6;
    double lambda = 1.0;
    int decoder_blocks = 2;
};

struct OptimConfig {
    std::string algo = "adam";  // adam | sgd
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
    int epochs = 200;
    std::string lr_schedule = "constant";  // constant | cosine
    int checkpoint_every = 50;
};

struct FinetuneConfig {
    int epochs = 30;
    double lr = 1e-3;
    int head_warmup_epochs = 0;  // head-only epochs before the encoder unfreezes
    bool freeze_encoder = false;
    double accuracy_threshold = 0.95;
    int train_count = -1;  // -1: ceil(2n/3) leading stems train, rest test
};

// The resolved run configuration. Parsing fills defaults, validates ranges,
// and rejects unknown keys at every level (docs/config_schema.json mirrors
// the accepted shape).
struct RunConfig {
    std::uint64_t seed = 42;
    int threads = 1;
    std::vector<BranchConfig> branches;
    ModelConfig model;
    MaeConfig mae;
    OptimConfig optim;
    FinetuneConfig finetune;

    int blocks() const { return static_cast<int>(model.schedule.size()); }
};

RunConfig default_config();
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config_file(const std::string& path);
nlohmann::json to_json(const RunConfig& cfg);  // fully resolved, sorted keys
std::uint64_t config_hash(const RunConfig& cfg);

// Hex digest string of config_hash, as stored in checkpoint manifests.
std::string config_hash_hex(const RunConfig& cfg);

}  // namespace octmesh
