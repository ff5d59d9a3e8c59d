#pragma once

#include <cstdint>
#include <vector>

#include "octmesh/encoder.hpp"

namespace octmesh {

// Deterministic token mask: a uniform subset without replacement of size
// round(ratio * total), round half to even.
struct MaskSpec {
    int total = 0;
    double ratio = 0.0;
    std::uint64_t seed = 0;
    std::vector<int> masked;            // sorted ranks
    std::vector<std::uint8_t> is_masked;  // size total

    int masked_count() const { return static_cast<int>(masked.size()); }
    std::vector<int> visible() const;
};

MaskSpec make_mask(int total, double ratio, std::uint64_t seed);

// Two-directional sum of squared nearest-neighbor distances, exactly as the
// loss is defined (sums, not means); the flag divides each directed term by
// its set size instead. Nearest-neighbor ties break to the lowest index.
double chamfer(const std::vector<Vec3>& p, const std::vector<Vec3>& q, bool normalized = false);

// Differentiable chamfer between predicted coordinates (M x 3) and fixed
// targets. Match indices come from the current forward values; gradients flow
// through the squared distances of the matched pairs.
Var chamfer_loss(Tape& tape, Var pred, const std::vector<Vec3>& target, bool normalized = false);

struct MaeOutput {
    Var pred_coords;              // M x 3
    Var pred_feats;               // M x F; invalid when F == 0
    Var latents;                  // |visible| x D encoder output
    std::vector<int> masked_ranks;
};

// Visible-only encoding, then a lightweight windowed decoder over the full
// rank sequence (visible latents interleaved with a learned mask token plus a
// positional signal from the depth max(d-2, 0) ancestor cell center), then
// linear heads for coordinates and features of each masked rank.
MaeOutput mae_forward(Tape& tape, ParamStore& store, const RunConfig& cfg, int branch,
                      const BranchContext& ctx, const MaskSpec& mask);

struct MaeLossParts {
    Var total;
    double chamfer_value = 0.0;
    double feat_value = 0.0;
};

// total = chamfer(pred, target) + lambda * mean over masked ranks of the
// squared feature error. Zero masked ranks yields a zero loss by convention.
MaeLossParts mae_loss(Tape& tape, const MaeOutput& out, const Octree& octree, double lambda);

}  // namespace octmesh
