#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace octmesh {

enum class CurveKind { ZOrder, Hilbert };

const char* to_string(CurveKind k);
CurveKind curve_from_string(const std::string& s);

// A space-filling-curve key for one cell of the 2^d x 2^d x 2^d grid.
// code occupies the low 3*d bits; everything above is zero.
struct OctKey {
    std::uint64_t code = 0;
    int depth = 0;

    friend bool operator==(const OctKey&, const OctKey&) = default;
    friend auto operator<=>(const OctKey& a, const OctKey& b) { return a.code <=> b.code; }
};

constexpr int kMaxCurveDepth = 20;  // 3*20 = 60 bits

// Z-order (Morton): per level, one octant digit (x-bit << 2 | y-bit << 1 | z-bit),
// most significant level first.
OctKey zorder_encode(std::uint32_t gx, std::uint32_t gy, std::uint32_t gz, int depth);
std::array<std::uint32_t, 3> zorder_decode(OctKey key);

// Hilbert index via the axis-transpose construction; consecutive codes map to
// grid cells at L1 distance 1.
OctKey hilbert_encode(std::uint32_t gx, std::uint32_t gy, std::uint32_t gz, int depth);
std::array<std::uint32_t, 3> hilbert_decode(OctKey key);

OctKey curve_encode(CurveKind curve, std::uint32_t gx, std::uint32_t gy, std::uint32_t gz,
                    int depth);
std::array<std::uint32_t, 3> curve_decode(CurveKind curve, OctKey key);

}  // namespace octmesh
