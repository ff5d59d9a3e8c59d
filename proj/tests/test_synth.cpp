#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "octmesh/rep_points.hpp"
#include "octmesh/synth.hpp"

using namespace octmesh;
namespace fs = std::filesystem;

namespace {

const Mat3 kIdentity = {1, 0, 0, 0, 1, 0, 0, 0, 1};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("unit sphere tessellation: 482 vertices, closed surface, radial distance 1") {
    Mesh m = make_ellipsoid({1, 1, 1}, kIdentity);
    CHECK(m.vertex_count() == 482);
    CHECK(m.simplex_count() == 960);
    // Euler characteristic of a sphere: V - E + F = 2
    Mesh copy = m;
    CHECK(m.vertex_count() - int(unique_edges(copy).size()) + m.simplex_count() == 2);

    add_synthetic_features(m);
    CHECK(m.feature_names == std::vector<std::string>{"curv", "radial"});
    for (int i = 0; i < m.vertex_count(); ++i)
        CHECK(std::abs(m.feature_row(i)[1] - 1.0) < 1e-6);
}

TEST_CASE("box tessellation is welded and closed") {
    Mesh m = make_box({1, 1, 1}, kIdentity);
    CHECK(m.vertex_count() == 488);
    CHECK(m.simplex_count() == 972);
    Mesh copy = m;
    CHECK(m.vertex_count() - int(unique_edges(copy).size()) + m.simplex_count() == 2);

    // the angle defect concentrates at the 8 corners; faces and edge lines
    // are intrinsically flat, and the total must satisfy Gauss-Bonnet (4 pi)
    add_synthetic_features(m);
    int flat = 0, corners = 0;
    double total_defect = 0;
    for (int i = 0; i < m.vertex_count(); ++i) {
        const double d = m.feature_row(i)[0];
        total_defect += d;
        if (std::abs(d) < 1e-9) ++flat;
        if (std::abs(d - 2 * 3.14159265358979323846 / 4) < 1e-9) ++corners;
    }
    CHECK(flat == 480);
    CHECK(corners == 8);
    CHECK(total_defect == doctest::Approx(4 * 3.14159265358979323846).epsilon(1e-9));
}

TEST_CASE("generation is deterministic per seed") {
    auto a = synth_meshes(SynthKind::Ellipsoids, 3, 42);
    auto b = synth_meshes(SynthKind::Ellipsoids, 3, 42);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].vertices == b[i].vertices);
        CHECK(a[i].features == b[i].features);
    }
    auto c = synth_meshes(SynthKind::Ellipsoids, 3, 43);
    CHECK(a[0].vertices != c[0].vertices);
}

TEST_CASE("boxes-vs-spheres alternates classes for an even split") {
    std::vector<int> labels;
    auto meshes = synth_meshes(SynthKind::BoxesVsSpheres, 10, 1, &labels);
    CHECK(meshes.size() == 10);
    int boxes = 0;
    for (int l : labels) boxes += l == 0;
    CHECK(boxes == 5);
}

TEST_CASE("synth_dataset writes identical bytes on re-run") {
    const std::string dir =
        (fs::temp_directory_path() / ("octmesh_synth_" + std::to_string(::getpid()))).string();
    auto items = synth_dataset(SynthKind::BoxesVsSpheres, 2, 7, dir);
    REQUIRE(items.size() == 2);
    const std::string off = read_file(dir + "/mesh_0000.off");
    const std::string feat = read_file(dir + "/mesh_0000.features.csv");
    const std::string labels = read_file(dir + "/labels.csv");
    CHECK(!off.empty());
    CHECK(labels == "mesh,label\nmesh_0000,0\nmesh_0001,1\n");

    synth_dataset(SynthKind::BoxesVsSpheres, 2, 7, dir);
    CHECK(read_file(dir + "/mesh_0000.off") == off);
    CHECK(read_file(dir + "/mesh_0000.features.csv") == feat);
    fs::remove_all(dir);
}
