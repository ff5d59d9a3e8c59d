#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "octmesh/tensor.hpp"

namespace octmesh {

// First/second-moment buffers parallel to the store's insertion order.
struct AdamState {
    std::vector<Tensor> m, v;
    std::int64_t step = 0;
    void ensure(const ParamStore& store);
};

// Both steps require gradients produced since the last step, update in place,
// zero all gradients, and skip parameters with requires_grad off.
void sgd_step(ParamStore& store, double lr, double weight_decay = 0.0);
void adam_step(ParamStore& store, AdamState& state, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8, double weight_decay = 0.0);

// Checkpoint container: 8-byte magic "OMCKPT01", a length-prefixed JSON
// manifest, then length-prefixed (name, shape, little-endian f64 data)
// entries. Optimizer moments ride along as entries prefixed "opt.m."/"opt.v.".
// Round-trips bit-exactly; docs/file_formats.md has the byte layout.
void save_checkpoint(const std::string& path, const ParamStore& params, const AdamState* opt,
                     const nlohmann::json& manifest);

struct LoadedCheckpoint {
    ParamStore params;
    AdamState opt;
    bool has_opt = false;
    nlohmann::json manifest;
};
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace octmesh
