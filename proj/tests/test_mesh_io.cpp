#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "octmesh/errors.hpp"
#include "octmesh/mesh.hpp"

using namespace octmesh;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("octmesh_io_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

const char* kTetraSurfaceOff =
    "OFF\n"
    "4 4 0\n"
    "0 0 0\n"
    "1 0 0\n"
    "0 1 0\n"
    "0 0 1\n"
    "3 0 1 2\n"
    "3 0 1 3\n"
    "3 0 2 3\n"
    "3 1 2 3\n";

}  // namespace

TEST_CASE("load_mesh parses a tetrahedron surface OFF") {
    TempDir dir;
    write_file(dir.file("t.off"), kTetraSurfaceOff);
    Mesh m = load_mesh(dir.file("t.off"), MeshFormat::Off);
    CHECK(m.vertex_count() == 4);
    CHECK(m.simplex_count() == 4);
    CHECK(m.simplex_order == 3);
    CHECK(m.feature_dim() == 0);
    CHECK(m.vertex(3) == Vec3{0, 0, 1});
}

TEST_CASE("load_mesh is deterministic on identical bytes") {
    TempDir dir;
    write_file(dir.file("a.off"), kTetraSurfaceOff);
    write_file(dir.file("b.off"), kTetraSurfaceOff);
    Mesh a = load_mesh(dir.file("a.off"), MeshFormat::Off);
    Mesh b = load_mesh(dir.file("b.off"), MeshFormat::Off);
    CHECK(a.vertices == b.vertices);
    CHECK(a.simplices == b.simplices);
}

TEST_CASE("load_mesh OFF error paths") {
    TempDir dir;
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_mesh(dir.file("nope.off"), MeshFormat::Off), DataError);
    }
    SUBCASE("index out of range") {
        write_file(dir.file("bad.off"), "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 9\n");
        CHECK_THROWS_WITH_AS(load_mesh(dir.file("bad.off"), MeshFormat::Off),
                             doctest::Contains("out of range"), DataError);
    }
    SUBCASE("mixed arity rejected") {
        write_file(dir.file("quad.off"), "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n");
        CHECK_THROWS_AS(load_mesh(dir.file("quad.off"), MeshFormat::Off), DataError);
    }
    SUBCASE("NaN coordinate rejected") {
        write_file(dir.file("nan.off"), "OFF\n3 1 0\n0 0 0\nnan 0 0\n0 1 0\n3 0 1 2\n");
        CHECK_THROWS_AS(load_mesh(dir.file("nan.off"), MeshFormat::Off), DataError);
    }
    SUBCASE("error message carries line number") {
        write_file(dir.file("bad2.off"), "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n");
        try {
            load_mesh(dir.file("bad2.off"), MeshFormat::Off);
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find(":6:") != std::string::npos);
        }
    }
}

TEST_CASE("load_mesh parses a single-tetrahedron TetGen pair") {
    TempDir dir;
    write_file(dir.file("t.node"),
               "4 3 0 0\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n");
    write_file(dir.file("t.ele"), "1 4 0\n1 1 2 3 4\n");
    Mesh m = load_mesh(dir.file("t.node"), MeshFormat::Tetgen);
    CHECK(m.vertex_count() == 4);
    CHECK(m.simplex_count() == 1);
    CHECK(m.simplex_order == 4);
    // 1-based input normalized to 0-based
    CHECK(m.simplices == std::vector<int>{0, 1, 2, 3});

    SUBCASE("0-based indexing also accepted") {
        write_file(dir.file("z.node"), "4 3 0 0\n0 0 0 0\n1 1 0 0\n2 0 1 0\n3 0 0 1\n");
        write_file(dir.file("z.ele"), "1 4 0\n0 0 1 2 3\n");
        Mesh z = load_mesh(dir.file("z"), MeshFormat::Tetgen);
        CHECK(z.simplices == m.simplices);
    }
}

TEST_CASE("TetGen .ele index out of range is reported") {
    TempDir dir;
    write_file(dir.file("t.node"),
               "5 3 0 0\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n5 1 1 1\n");
    write_file(dir.file("t.ele"), "1 4 0\n1 1 2 3 10\n");
    CHECK_THROWS_WITH_AS(load_mesh(dir.file("t.node"), MeshFormat::Tetgen),
                         doctest::Contains("out of range"), DataError);
}

TEST_CASE("load_features attaches a CSV table") {
    TempDir dir;
    write_file(dir.file("t.off"), kTetraSurfaceOff);
    Mesh m = load_mesh(dir.file("t.off"), MeshFormat::Off);

    SUBCASE("channel names preserved in column order") {
        write_file(dir.file("f.csv"), "thickness,curvature\n1,10\n2,20\n3,30\n4,40\n");
        load_features(dir.file("f.csv"), m);
        CHECK(m.feature_dim() == 2);
        CHECK(m.feature_names == std::vector<std::string>{"thickness", "curvature"});
        CHECK(m.feature_row(2)[0] == 3.0);
        CHECK(m.feature_row(2)[1] == 30.0);
    }
    SUBCASE("row-count mismatch rejected") {
        write_file(dir.file("f.csv"), "a\n1\n2\n3\n");
        CHECK_THROWS_AS(load_features(dir.file("f.csv"), m), DataError);
    }
    SUBCASE("non-numeric cell rejected") {
        write_file(dir.file("f.csv"), "a\n1\nx\n3\n4\n");
        CHECK_THROWS_AS(load_features(dir.file("f.csv"), m), DataError);
    }
    SUBCASE("duplicate channel name rejected") {
        write_file(dir.file("f.csv"), "a,a\n1,1\n2,2\n3,3\n4,4\n");
        CHECK_THROWS_AS(load_features(dir.file("f.csv"), m), DataError);
    }
    SUBCASE("header-only file accepted only for an empty mesh") {
        write_file(dir.file("f.csv"), "a,b\n");
        CHECK_THROWS_AS(load_features(dir.file("f.csv"), m), DataError);
        Mesh empty;
        load_features(dir.file("f.csv"), empty);
        CHECK(empty.feature_dim() == 2);
        CHECK(empty.features.empty());
    }
}

TEST_CASE("PLY export round-trips coordinates at float32 precision") {
    TempDir dir;
    SUBCASE("one point, no colors") {
        std::vector<Vec3> pts = {{0.1234567891234, -2.5, 3e-7}};
        save_points_ply(pts, nullptr, dir.file("p.ply"));
        auto back = load_points_ply(dir.file("p.ply"));
        REQUIRE(back.size() == 1);
        for (int a = 0; a < 3; ++a) CHECK(float(back[0][a]) == float(pts[0][a]));
    }
    SUBCASE("empty cloud is valid") {
        save_points_ply({}, nullptr, dir.file("e.ply"));
        CHECK(load_points_ply(dir.file("e.ply")).empty());
    }
    SUBCASE("mismatched color count rejected") {
        std::vector<std::array<std::uint8_t, 3>> colors = {{255, 0, 0}};
        std::vector<Vec3> pts = {{0, 0, 0}, {1, 1, 1}};
        CHECK_THROWS_AS(save_points_ply(pts, &colors, dir.file("c.ply")), DataError);
    }
    SUBCASE("colored export readable") {
        std::vector<Vec3> pts = {{0, 0, 0}, {1, 1, 1}};
        std::vector<std::array<std::uint8_t, 3>> colors = {{128, 128, 128}, {255, 0, 0}};
        save_points_ply(pts, &colors, dir.file("c.ply"));
        CHECK(load_points_ply(dir.file("c.ply")).size() == 2);
    }
}

TEST_CASE("OFF writer round-trips through the loader") {
    TempDir dir;
    write_file(dir.file("t.off"), kTetraSurfaceOff);
    Mesh m = load_mesh(dir.file("t.off"), MeshFormat::Off);
    m.vertices[0] = 0.12345678901234567;
    save_mesh_off(m, dir.file("copy.off"));
    Mesh back = load_mesh(dir.file("copy.off"), MeshFormat::Off);
    CHECK(back.vertices == m.vertices);
    CHECK(back.simplices == m.simplices);
}
