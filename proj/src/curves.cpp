#include "octmesh/curves.hpp"

#include "octmesh/errors.hpp"

namespace octmesh {

const char* to_string(CurveKind k) {
    return k == CurveKind::ZOrder ? "zorder" : "hilbert";
}

CurveKind curve_from_string(const std::string& s) {
    if (s == "zorder") return CurveKind::ZOrder;
    if (s == "hilbert") return CurveKind::Hilbert;
    throw ConfigError("unknown curve '" + s + "' (expected zorder or hilbert)");
}

namespace {

void check_coords(std::uint32_t gx, std::uint32_t gy, std::uint32_t gz, int depth) {
    if (depth < 1 || depth > kMaxCurveDepth)
        throw ConfigError("curve depth must be in [1, " + std::to_string(kMaxCurveDepth) + "]");
    const std::uint64_t n = std::uint64_t(1) << depth;
    if (gx >= n || gy >= n || gz >= n)
        throw DataError("grid coordinate out of range for depth " + std::to_string(depth));
}

// Spread the low 21 bits of v so bit i lands at position 3*i.
std::uint64_t spread3(std::uint64_t v) {
    v &= 0x1fffff;
    v = (v | (v << 32)) & 0x1f00000000ffffull;
    v = (v | (v << 16)) & 0x1f0000ff0000ffull;
    v = (v | (v << 8)) & 0x100f00f00f00f00full;
    v = (v | (v << 4)) & 0x10c30c30c30c30c3ull;
    v = (v | (v << 2)) & 0x1249249249249249ull;
    return v;
}

std::uint64_t compact3(std::uint64_t v) {
    v &= 0x1249249249249249ull;
    v = (v ^ (v >> 2)) & 0x10c30c30c30c30c3ull;
    v = (v ^ (v >> 4)) & 0x100f00f00f00f00full;
    v = (v ^ (v >> 8)) & 0x1f0000ff0000ffull;
    v = (v ^ (v >> 16)) & 0x1f00000000ffffull;
    v = (v ^ (v >> 32)) & 0x1fffff;
    return v;
}

std::uint64_t interleave3(std::uint32_t x, std::uint32_t y, std::uint32_t z) {
    return (spread3(x) << 2) | (spread3(y) << 1) | spread3(z);
}

std::array<std::uint32_t, 3> deinterleave3(std::uint64_t code) {
    return {static_cast<std::uint32_t>(compact3(code >> 2)),
            static_cast<std::uint32_t>(compact3(code >> 1)),
            static_cast<std::uint32_t>(compact3(code))};
}

// Skilling's transpose transforms: between grid axes and the "transpose"
// form of the Hilbert index (index bits distributed across 3 words).
void axes_to_transpose(std::uint32_t x[3], int bits) {
    std::uint32_t m = std::uint32_t(1) << (bits - 1), p, q, t;
    for (q = m; q > 1; q >>= 1) {
        p = q - 1;
        for (int i = 0; i < 3; ++i) {
            if (x[i] & q) {
                x[0] ^= p;
            } else {
                t = (x[0] ^ x[i]) & p;
                x[0] ^= t;
                x[i] ^= t;
            }
        }
    }
    for (int i = 1; i < 3; ++i) x[i] ^= x[i - 1];
    t = 0;
    for (q = m; q > 1; q >>= 1)
        if (x[2] & q) t ^= q - 1;
    for (int i = 0; i < 3; ++i) x[i] ^= t;
}

void transpose_to_axes(std::uint32_t x[3], int bits) {
    std::uint32_t n = std::uint32_t(2) << (bits - 1), p, q, t;
    t = x[2] >> 1;
    for (int i = 2; i > 0; --i) x[i] ^= x[i - 1];
    x[0] ^= t;
    for (q = 2; q != n; q <<= 1) {
        p = q - 1;
        for (int i = 2; i >= 0; --i) {
            if (x[i] & q) {
                x[0] ^= p;
            } else {
                t = (x[0] ^ x[i]) & p;
                x[0] ^= t;
                x[i] ^= t;
            }
        }
    }
}

}  // namespace

OctKey zorder_encode(std::uint32_t gx, std::uint32_t gy, std::uint32_t gz, int depth) {
    check_coords(gx, gy, gz, depth);
    return OctKey{interleave3(gx, gy, gz), depth};
}

std::array<std::uint32_t, 3> zorder_decode(OctKey key) {
    return deinterleave3(key.code);
}

OctKey hilbert_encode(std::uint32_t gx, std::uint32_t gy, std::uint32_t gz, int depth) {
    check_coords(gx, gy, gz, depth);
    std::uint32_t x[3] = {gx, gy, gz};
    axes_to_transpose(x, depth);
    // Bit k of x[i] is bit 3*k + (2 - i) of the Hilbert index: interleaving
    // with x[0] most significant yields the integer code.
    return OctKey{interleave3(x[0], x[1], x[2]), depth};
}

std::array<std::uint32_t, 3> hilbert_decode(OctKey key) {
    auto t = deinterleave3(key.code);
    std::uint32_t x[3] = {t[0], t[1], t[2]};
    transpose_to_axes(x, key.depth);
    return {x[0], x[1], x[2]};
}

OctKey curve_encode(CurveKind curve, std::uint32_t gx, std::uint32_t gy, std::uint32_t gz,
                    int depth) {
    return curve == CurveKind::ZOrder ? zorder_encode(gx, gy, gz, depth)
                                      : hilbert_encode(gx, gy, gz, depth);
}

std::array<std::uint32_t, 3> curve_decode(CurveKind curve, OctKey key) {
    return curve == CurveKind::ZOrder ? zorder_decode(key) : hilbert_decode(key);
}

}  // namespace octmesh
