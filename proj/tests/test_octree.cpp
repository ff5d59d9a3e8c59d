#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "octmesh/errors.hpp"
#include "octmesh/octree.hpp"
#include "octmesh/rng.hpp"

using namespace octmesh;

namespace {

RepPointSet make_points(const std::vector<Vec3>& pts, int feature_dim = 0,
                        const std::vector<double>& feats = {}) {
    RepPointSet rp;
    rp.feature_dim = feature_dim;
    for (const auto& p : pts) {
        rp.points.push_back(p[0]);
        rp.points.push_back(p[1]);
        rp.points.push_back(p[2]);
        rp.source.push_back(0);
    }
    rp.features = feats;
    return rp;
}

std::vector<int> covered_tokens(const WindowPartition& part) {
    std::vector<int> out;
    for (std::size_t s = 0; s < part.slots.size(); ++s)
        if (!part.pad_mask[s]) out.push_back(part.slots[s]);
    return out;
}

}  // namespace

TEST_CASE("single point yields a single leaf holding the normalized point") {
    auto rp = make_points({{3.0, -1.0, 2.0}});
    Octree t = build_octree(rp, 4, CurveKind::ZOrder);
    CHECK(t.leaf_count() == 1);
    CHECK(t.leaf_counts[0] == 1);
    CHECK(t.point_to_leaf == std::vector<int>{0});
    for (int a = 0; a < 3; ++a) {
        CHECK(t.leaf_coord(0)[a] >= 0.0);
        CHECK(t.leaf_coord(0)[a] <= 1.0);
    }
}

TEST_CASE("eight bbox corners at depth 1 occupy all eight octants") {
    std::vector<Vec3> corners;
    for (int x = 0; x <= 1; ++x)
        for (int y = 0; y <= 1; ++y)
            for (int z = 0; z <= 1; ++z) corners.push_back({double(x), double(y), double(z)});
    auto rp = make_points(corners);
    Bbox box{{0, 0, 0}, {1, 1, 1}};
    Octree t = build_octree(rp, 1, CurveKind::ZOrder, box);
    REQUIRE(t.leaf_count() == 8);
    for (int r = 0; r < 8; ++r) {
        CHECK(t.leaf_keys[r] == std::uint64_t(r));
        CHECK(t.leaf_counts[r] == 1);
    }
}

TEST_CASE("coincident points merge into one leaf with averaged features") {
    auto rp = make_points({{0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}}, 2, {1, 10, 3, 30});
    Octree t = build_octree(rp, 3, CurveKind::ZOrder);
    REQUIRE(t.leaf_count() == 1);
    CHECK(t.leaf_counts[0] == 2);
    CHECK(t.leaf_feature_row(0)[0] == 2.0);
    CHECK(t.leaf_feature_row(0)[1] == 20.0);
    CHECK(t.point_to_leaf == std::vector<int>{0, 0});
}

TEST_CASE("empty point set and degenerate axes") {
    RepPointSet empty;
    CHECK_THROWS_AS(build_octree(empty, 3, CurveKind::ZOrder), DataError);

    // all points in a z=const plane: z axis widened by a unit, build succeeds
    auto rp = make_points({{0, 0, 5}, {1, 0, 5}, {0, 1, 5}});
    Octree t = build_octree(rp, 2, CurveKind::ZOrder);
    CHECK(t.leaf_count() >= 1);
    CHECK(t.bbox.hi[2] - t.bbox.lo[2] == 1.0);
}

TEST_CASE("octree fuzz: keys sorted, counts conserved, means in-cell, permutation-invariant") {
    Rng rng(20240811);
    for (int iter = 0; iter < 60; ++iter) {
        const int m = 1 + int(rng.next_below(400));
        const int d = 1 + int(rng.next_below(8));
        std::vector<Vec3> pts;
        for (int i = 0; i < m; ++i)
            pts.push_back({rng.next_range(-5, 5), rng.next_range(0, 1), rng.next_range(100, 101)});
        auto rp = make_points(pts);
        Octree t = build_octree(rp, d, iter % 2 ? CurveKind::Hilbert : CurveKind::ZOrder);

        CHECK(std::is_sorted(t.leaf_keys.begin(), t.leaf_keys.end()));
        CHECK(std::adjacent_find(t.leaf_keys.begin(), t.leaf_keys.end()) == t.leaf_keys.end());
        int total = 0;
        for (int c : t.leaf_counts) total += c;
        CHECK(total == m);

        const double cell = std::exp2(-t.depth);
        for (int r = 0; r < t.leaf_count(); ++r) {
            auto g = t.leaf_grid(r);
            for (int a = 0; a < 3; ++a) {
                CHECK(t.leaf_coord(r)[a] >= g[a] * cell);
                CHECK(t.leaf_coord(r)[a] <= (g[a] + 1) * cell);
            }
        }

        // permutation invariance, bit-exact
        std::vector<int> perm(m);
        for (int i = 0; i < m; ++i) perm[i] = i;
        shuffle(perm, rng);
        RepPointSet shuffled;
        shuffled.feature_dim = 0;
        for (int i : perm) {
            shuffled.points.insert(shuffled.points.end(), rp.points.begin() + 3 * i,
                                   rp.points.begin() + 3 * i + 3);
            shuffled.source.push_back(0);
        }
        Octree t2 = build_octree(shuffled, d, t.curve);
        CHECK(t2.leaf_keys == t.leaf_keys);
        CHECK(t2.leaf_coords == t.leaf_coords);
        CHECK(t2.leaf_counts == t.leaf_counts);
    }
}

TEST_CASE("partition_windows pads only the final window") {
    auto p = partition_windows(10, 4);
    CHECK(p.window_count() == 3);
    CHECK(p.slots == std::vector<std::int32_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, -1, -1});
    CHECK(covered_tokens(p) == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});

    auto full = partition_windows(8, 8);
    CHECK(full.window_count() == 1);
    CHECK(std::count(full.pad_mask.begin(), full.pad_mask.end(), 1) == 0);

    auto tiny = partition_windows(1, 4);
    CHECK(tiny.window_count() == 1);
    CHECK(std::count(tiny.pad_mask.begin(), tiny.pad_mask.end(), 1) == 3);

    CHECK(partition_windows(0, 4).window_count() == 0);
}

TEST_CASE("dilated grouping follows the residue-class rule") {
    SUBCASE("stride 1 is bit-identical to the local partition") {
        auto a = dilated_grouping(12, 3, 1);
        auto b = partition_windows(12, 3);
        CHECK(a.slots == b.slots);
        CHECK(a.pad_mask == b.pad_mask);
    }
    SUBCASE("12 tokens, K=3, s=2") {
        auto p = dilated_grouping(12, 3, 2);
        CHECK(p.slots == std::vector<std::int32_t>{0, 2, 4, 6, 8, 10, 1, 3, 5, 7, 9, 11});
        CHECK(std::count(p.pad_mask.begin(), p.pad_mask.end(), 1) == 0);
    }
    SUBCASE("5 tokens, K=2, s=2") {
        auto p = dilated_grouping(5, 2, 2);
        CHECK(p.slots == std::vector<std::int32_t>{0, 2, 4, -1, 1, 3});
        CHECK(p.pad_mask == std::vector<std::uint8_t>{0, 0, 0, 1, 0, 0});
    }
}

TEST_CASE("partition coverage fuzz: every token exactly once") {
    Rng rng(7);
    for (int iter = 0; iter < 200; ++iter) {
        const int l = int(rng.next_below(501));
        const int k = 1 + int(rng.next_below(64));
        const int s = 1 + int(rng.next_below(8));
        auto local = partition_windows(l, k);
        auto dil = dilated_grouping(l, k, s);
        for (const auto& p : {local, dil}) {
            auto tokens = covered_tokens(p);
            std::sort(tokens.begin(), tokens.end());
            CHECK(int(tokens.size()) == l);
            for (int i = 0; i < l; ++i) CHECK(tokens[i] == i);
        }
        // non-pad slots of the local partition appear in key order
        auto local_order = covered_tokens(local);
        CHECK(std::is_sorted(local_order.begin(), local_order.end()));
    }
}

TEST_CASE("leaf_neighbors on a single-leaf octree") {
    auto rp = make_points({{0.5, 0.5, 0.5}});
    Octree t = build_octree(rp, 3, CurveKind::ZOrder);
    auto nbrs = leaf_neighbors(t, 0);
    for (int o = 0; o < 27; ++o) CHECK(nbrs[o] == (o == 13 ? 0 : -1));
}

TEST_CASE("adjacent leaves see each other along the +x/-x offsets") {
    // two cells adjacent along x at depth 2 inside an explicit unit box
    Bbox box{{0, 0, 0}, {1, 1, 1}};
    auto rp = make_points({{0.30, 0.1, 0.1}, {0.55, 0.1, 0.1}});  // cells x=1 and x=2 at d=2
    Octree t = build_octree(rp, 2, CurveKind::ZOrder, box);
    REQUIRE(t.leaf_count() == 2);
    int r0 = t.point_to_leaf[0], r1 = t.point_to_leaf[1];
    auto n0 = leaf_neighbors(t, r0);
    auto n1 = leaf_neighbors(t, r1);
    // +x offset is (dx,dy,dz)=(1,0,0) -> index 2*9+1*3+1 = 22; -x is index 4
    CHECK(n0[22] == r1);
    CHECK(n1[4] == r0);
}

TEST_CASE("grid-boundary neighbors are absent, never wrapped") {
    Bbox box{{0, 0, 0}, {1, 1, 1}};
    auto rp = make_points({{0.01, 0.01, 0.01}});  // corner cell (0,0,0)
    Octree t = build_octree(rp, 3, CurveKind::ZOrder, box);
    auto nbrs = leaf_neighbors(t, 0);
    for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dz = -1; dz <= 1; ++dz) {
                int o = (dx + 1) * 9 + (dy + 1) * 3 + (dz + 1);
                if (dx < 0 || dy < 0 || dz < 0) CHECK(nbrs[o] == -1);
            }
}

TEST_CASE("structure cache reuses the sort permutation only when codes match") {
    StructureCache cache;
    std::vector<std::uint64_t> codes = {5, 1, 3};
    auto o1 = cache.argsort_codes(42, codes);
    CHECK(o1 == std::vector<int>{1, 2, 0});
    auto o2 = cache.argsort_codes(42, codes);
    CHECK(o2 == o1);
    std::vector<std::uint64_t> other = {1, 5, 3};
    auto o3 = cache.argsort_codes(42, other);
    CHECK(o3 == std::vector<int>{0, 2, 1});
}
