#include "octmesh/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "octmesh/errors.hpp"
#include "octmesh/rng.hpp"

namespace octmesh {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

void check(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

ScheduleEntry parse_schedule_entry(const json& j, int default_window, int index) {
    const std::string where = "model.schedule[" + std::to_string(index) + "]";
    reject_unknown(j, {"kind", "window", "stride"}, where);
    ScheduleEntry e;
    const std::string kind = get_or<std::string>(j, "kind", "local");
    check(kind == "local" || kind == "dilated", where + ": kind must be local or dilated");
    e.dilated = kind == "dilated";
    e.window = get_or<int>(j, "window", default_window);
    e.stride = get_or<int>(j, "stride", e.dilated ? 4 : 1);
    check(e.window >= 1, where + ": window must be >= 1");
    check(e.stride >= 1, where + ": stride must be >= 1");
    check(e.dilated || e.stride == 1, where + ": local entries take no stride");
    return e;
}

}  // namespace

RunConfig default_config() {
    RunConfig cfg;
    cfg.branches.push_back(BranchConfig{});
    for (int i = 0; i < 4; ++i)
        cfg.model.schedule.push_back(
            ScheduleEntry{i % 2 == 1, cfg.model.window, i % 2 == 1 ? 4 : 1});
    return cfg;
}

RunConfig parse_config(const nlohmann::json& j) {
    reject_unknown(j, {"seed", "threads", "branches", "model", "mae", "optim", "finetune"},
                   "config");
    RunConfig cfg;
    cfg.seed = get_or<std::uint64_t>(j, "seed", 42);
    cfg.threads = get_or<int>(j, "threads", 1);
    check(cfg.threads >= 1, "threads must be >= 1");

    if (j.contains("branches")) {
        check(j.at("branches").is_array() && !j.at("branches").empty(),
              "branches must be a non-empty array");
        int b = 0;
        for (const auto& bj : j.at("branches")) {
            const std::string where = "branches[" + std::to_string(b++) + "]";
            reject_unknown(bj, {"points", "depth", "curve"}, where);
            BranchConfig bc;
            bc.points = rep_point_kind_from_string(get_or<std::string>(bj, "points", "vertices"));
            bc.depth = get_or<int>(bj, "depth", 6);
            bc.curve = curve_from_string(get_or<std::string>(bj, "curve", "zorder"));
            check(bc.depth >= 1 && bc.depth <= kMaxCurveDepth,
                  where + ": depth must be in [1, " + std::to_string(kMaxCurveDepth) + "]");
            cfg.branches.push_back(bc);
        }
    } else {
        cfg.branches.push_back(BranchConfig{});
    }

    const json mj = j.contains("model") ? j.at("model") : json::object();
    reject_unknown(mj, {"dim", "heads", "window", "schedule", "cpe", "cpe_per_block", "fusion"},
                   "model");
    cfg.model.dim = get_or<int>(mj, "dim", 64);
    cfg.model.heads = get_or<int>(mj, "heads", 4);
    cfg.model.window = get_or<int>(mj, "window", 32);
    cfg.model.cpe = get_or<bool>(mj, "cpe", true);
    cfg.model.cpe_per_block = get_or<bool>(mj, "cpe_per_block", false);
    cfg.model.fusion = get_or<bool>(mj, "fusion", true);
    check(cfg.model.dim >= 1, "model.dim must be >= 1");
    check(cfg.model.heads >= 1, "model.heads must be >= 1");
    check(cfg.model.dim % cfg.model.heads == 0, "model.dim must be divisible by model.heads");
    check(cfg.model.window >= 1, "model.window must be >= 1");
    if (mj.contains("schedule")) {
        check(mj.at("schedule").is_array() && !mj.at("schedule").empty(),
              "model.schedule must be a non-empty array");
        int i = 0;
        for (const auto& ej : mj.at("schedule"))
            cfg.model.schedule.push_back(parse_schedule_entry(ej, cfg.model.window, i++));
    } else {
        for (int i = 0; i < 4; ++i)
            cfg.model.schedule.push_back(
                ScheduleEntry{i % 2 == 1, cfg.model.window, i % 2 == 1 ? 4 : 1});
    }

    const json aj = j.contains("mae") ? j.at("mae") : json::object();
    reject_unknown(aj, {"mask_ratio", "lambda", "decoder_blocks"}, "mae");
    cfg.mae.mask_ratio = get_or<double>(aj, "mask_ratio", 0.6);
    cfg.mae.lambda = get_or<double>(aj, "lambda", 1.0);
    cfg.mae.decoder_blocks = get_or<int>(aj, "decoder_blocks", 2);
    check(cfg.mae.mask_ratio >= 0.0 && cfg.mae.mask_ratio < 1.0,
          "mae.mask_ratio must be in [0, 1)");
    check(cfg.mae.lambda >= 0.0, "mae.lambda must be >= 0");
    check(cfg.mae.decoder_blocks >= 1, "mae.decoder_blocks must be >= 1");

    const json oj = j.contains("optim") ? j.at("optim") : json::object();
    reject_unknown(oj,
                   {"algo", "lr", "beta1", "beta2", "eps", "weight_decay", "epochs",
                    "lr_schedule", "checkpoint_every"},
                   "optim");
    cfg.optim.algo = get_or<std::string>(oj, "algo", "adam");
    cfg.optim.lr = get_or<double>(oj, "lr", 1e-3);
    cfg.optim.beta1 = get_or<double>(oj, "beta1", 0.9);
    cfg.optim.beta2 = get_or<double>(oj, "beta2", 0.999);
    cfg.optim.eps = get_or<double>(oj, "eps", 1e-8);
    cfg.optim.weight_decay = get_or<double>(oj, "weight_decay", 0.0);
    cfg.optim.epochs = get_or<int>(oj, "epochs", 200);
    cfg.optim.lr_schedule = get_or<std::string>(oj, "lr_schedule", "constant");
    cfg.optim.checkpoint_every = get_or<int>(oj, "checkpoint_every", 50);
    check(cfg.optim.algo == "adam" || cfg.optim.algo == "sgd", "optim.algo must be adam or sgd");
    check(cfg.optim.lr >= 0.0, "optim.lr must be >= 0");
    check(cfg.optim.epochs >= 1, "optim.epochs must be >= 1");
    check(cfg.optim.lr_schedule == "constant" || cfg.optim.lr_schedule == "cosine",
          "optim.lr_schedule must be constant or cosine");
    check(cfg.optim.checkpoint_every >= 1, "optim.checkpoint_every must be >= 1");

    const json fj = j.contains("finetune") ? j.at("finetune") : json::object();
    reject_unknown(
        fj, {"epochs", "lr", "head_warmup_epochs", "freeze_encoder", "accuracy_threshold",
             "train_count"},
        "finetune");
    cfg.finetune.epochs = get_or<int>(fj, "epochs", 30);
    cfg.finetune.lr = get_or<double>(fj, "lr", 1e-3);
    cfg.finetune.head_warmup_epochs = get_or<int>(fj, "head_warmup_epochs", 0);
    check(cfg.finetune.head_warmup_epochs >= 0, "finetune.head_warmup_epochs must be >= 0");
    cfg.finetune.freeze_encoder = get_or<bool>(fj, "freeze_encoder", false);
    cfg.finetune.accuracy_threshold = get_or<double>(fj, "accuracy_threshold", 0.95);
    cfg.finetune.train_count = get_or<int>(fj, "train_count", -1);
    check(cfg.finetune.epochs >= 1, "finetune.epochs must be >= 1");
    check(cfg.finetune.accuracy_threshold > 0.0 && cfg.finetune.accuracy_threshold <= 1.0,
          "finetune.accuracy_threshold must be in (0, 1]");
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError(path + ": invalid JSON");
    return parse_config(j);
}

nlohmann::json to_json(const RunConfig& cfg) {
    json branches = json::array();
    for (const auto& b : cfg.branches)
        branches.push_back({{"points", to_string(b.points)},
                            {"depth", b.depth},
                            {"curve", to_string(b.curve)}});
    json schedule = json::array();
    for (const auto& e : cfg.model.schedule) {
        json ej = {{"kind", e.dilated ? "dilated" : "local"}, {"window", e.window}};
        if (e.dilated) ej["stride"] = e.stride;
        schedule.push_back(ej);
    }
    return json{
        {"seed", cfg.seed},
        {"threads", cfg.threads},
        {"branches", branches},
        {"model",
         {{"dim", cfg.model.dim},
          {"heads", cfg.model.heads},
          {"window", cfg.model.window},
          {"schedule", schedule},
          {"cpe", cfg.model.cpe},
          {"cpe_per_block", cfg.model.cpe_per_block},
          {"fusion", cfg.model.fusion}}},
        {"mae",
         {{"mask_ratio", cfg.mae.mask_ratio},
          {"lambda", cfg.mae.lambda},
          {"decoder_blocks", cfg.mae.decoder_blocks}}},
        {"optim",
         {{"algo", cfg.optim.algo},
          {"lr", cfg.optim.lr},
          {"beta1", cfg.optim.beta1},
          {"beta2", cfg.optim.beta2},
          {"eps", cfg.optim.eps},
          {"weight_decay", cfg.optim.weight_decay},
          {"epochs", cfg.optim.epochs},
          {"lr_schedule", cfg.optim.lr_schedule},
          {"checkpoint_every", cfg.optim.checkpoint_every}}},
        {"finetune",
         {{"epochs", cfg.finetune.epochs},
          {"lr", cfg.finetune.lr},
          {"head_warmup_epochs", cfg.finetune.head_warmup_epochs},
          {"freeze_encoder", cfg.finetune.freeze_encoder},
          {"accuracy_threshold", cfg.finetune.accuracy_threshold},
          {"train_count", cfg.finetune.train_count}}}};
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a(to_json(cfg).dump()); }

std::string config_hash_hex(const RunConfig& cfg) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg)));
    return buf;
}

}  // namespace octmesh
