#include "octmesh/synth.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "octmesh/errors.hpp"

namespace octmesh {

SynthKind synth_kind_from_string(const std::string& s) {
    if (s == "ellipsoids") return SynthKind::Ellipsoids;
    if (s == "boxes-vs-spheres") return SynthKind::BoxesVsSpheres;
    throw ConfigError("unknown dataset kind '" + s + "'");
}

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec3 apply(const Mat3& r, Vec3 v) {
    return {r[0] * v[0] + r[1] * v[1] + r[2] * v[2], r[3] * v[0] + r[4] * v[1] + r[5] * v[2],
            r[6] * v[0] + r[7] * v[1] + r[8] * v[2]};
}

void place_vertices(Mesh& mesh, const std::vector<Vec3>& unit, Vec3 scales, const Mat3& rot) {
    mesh.vertices.reserve(unit.size() * 3);
    for (const Vec3& u : unit) {
        Vec3 v = apply(rot, {u[0] * scales[0], u[1] * scales[1], u[2] * scales[2]});
        mesh.vertices.push_back(v[0]);
        mesh.vertices.push_back(v[1]);
        mesh.vertices.push_back(v[2]);
    }
}

}  // namespace

Mat3 random_rotation(Rng& rng) {
    // Shoemake's subgroup algorithm: uniform quaternion from three uniforms
    const double u1 = rng.next_double(), u2 = rng.next_double(), u3 = rng.next_double();
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    const double qx = a * std::sin(2 * kPi * u2);
    const double qy = a * std::cos(2 * kPi * u2);
    const double qz = b * std::sin(2 * kPi * u3);
    const double qw = b * std::cos(2 * kPi * u3);
    return Mat3{1 - 2 * (qy * qy + qz * qz), 2 * (qx * qy - qz * qw), 2 * (qx * qz + qy * qw),
                2 * (qx * qy + qz * qw),     1 - 2 * (qx * qx + qz * qz), 2 * (qy * qz - qx * qw),
                2 * (qx * qz - qy * qw),     2 * (qy * qz + qx * qw), 1 - 2 * (qx * qx + qy * qy)};
}

Mesh make_ellipsoid(Vec3 scales, const Mat3& rotation, int rings, int segments) {
    std::vector<Vec3> unit;
    unit.push_back({0, 0, 1});
    for (int i = 1; i <= rings; ++i) {
        const double theta = kPi * double(i) / double(rings + 1);
        for (int j = 0; j < segments; ++j) {
            const double phi = 2 * kPi * double(j) / double(segments);
            unit.push_back(
                {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                 std::cos(theta)});
        }
    }
    unit.push_back({0, 0, -1});
    const int south = static_cast<int>(unit.size()) - 1;
    auto ring_at = [&](int ring, int j) { return 1 + ring * segments + (j % segments); };

    Mesh mesh;
    mesh.simplex_order = 3;
    for (int j = 0; j < segments; ++j) {
        mesh.simplices.insert(mesh.simplices.end(), {0, ring_at(0, j), ring_at(0, j + 1)});
    }
    for (int i = 0; i + 1 < rings; ++i) {
        for (int j = 0; j < segments; ++j) {
            const int a = ring_at(i, j), b = ring_at(i, j + 1);
            const int c = ring_at(i + 1, j), d = ring_at(i + 1, j + 1);
            mesh.simplices.insert(mesh.simplices.end(), {a, c, b});
            mesh.simplices.insert(mesh.simplices.end(), {b, c, d});
        }
    }
    for (int j = 0; j < segments; ++j) {
        mesh.simplices.insert(mesh.simplices.end(),
                              {south, ring_at(rings - 1, j + 1), ring_at(rings - 1, j)});
    }
    place_vertices(mesh, unit, scales, rotation);
    mesh.validate();
    return mesh;
}

Mesh make_box(Vec3 scales, const Mat3& rotation, int divisions) {
    const int n = divisions;
    std::vector<Vec3> unit;
    std::map<std::array<double, 3>, int> welded;
    auto vertex_id = [&](Vec3 p) {
        std::array<double, 3> key = {p[0], p[1], p[2]};
        auto it = welded.find(key);
        if (it != welded.end()) return it->second;
        const int id = static_cast<int>(unit.size());
        welded[key] = id;
        unit.push_back(p);
        return id;
    };
    auto coord = [&](int i) { return -1.0 + 2.0 * double(i) / double(n); };

    Mesh mesh;
    mesh.simplex_order = 3;
    // axis = fixed coordinate, sign = which side; (u, v) sweep the face
    for (int axis = 0; axis < 3; ++axis) {
        for (int sign = -1; sign <= 1; sign += 2) {
            auto face_point = [&](int i, int j) {
                Vec3 p{};
                p[axis] = double(sign);
                p[(axis + 1) % 3] = coord(i);
                p[(axis + 2) % 3] = coord(j);
                return vertex_id(p);
            };
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    const int a = face_point(i, j), b = face_point(i + 1, j);
                    const int c = face_point(i, j + 1), d = face_point(i + 1, j + 1);
                    if (sign > 0) {
                        mesh.simplices.insert(mesh.simplices.end(), {a, b, d});
                        mesh.simplices.insert(mesh.simplices.end(), {a, d, c});
                    } else {
                        mesh.simplices.insert(mesh.simplices.end(), {a, d, b});
                        mesh.simplices.insert(mesh.simplices.end(), {a, c, d});
                    }
                }
            }
        }
    }
    place_vertices(mesh, unit, scales, rotation);
    mesh.validate();
    return mesh;
}

void add_synthetic_features(Mesh& mesh) {
    const int n = mesh.vertex_count();
    std::vector<double> defect(n, 2 * kPi);
    for (int s = 0; s < mesh.simplex_count(); ++s) {
        const int* t = mesh.simplex(s);
        for (int corner = 0; corner < 3; ++corner) {
            const Vec3 a = mesh.vertex(t[corner]);
            const Vec3 b = mesh.vertex(t[(corner + 1) % 3]);
            const Vec3 c = mesh.vertex(t[(corner + 2) % 3]);
            Vec3 ab{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
            Vec3 ac{c[0] - a[0], c[1] - a[1], c[2] - a[2]};
            const double lab = std::sqrt(ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2]);
            const double lac = std::sqrt(ac[0] * ac[0] + ac[1] * ac[1] + ac[2] * ac[2]);
            if (lab == 0 || lac == 0) continue;
            double cosv = (ab[0] * ac[0] + ab[1] * ac[1] + ab[2] * ac[2]) / (lab * lac);
            cosv = std::clamp(cosv, -1.0, 1.0);
            defect[t[corner]] -= std::acos(cosv);
        }
    }
    Vec3 centroid{0, 0, 0};
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < 3; ++a) centroid[a] += mesh.vertices[3 * i + a];
    for (int a = 0; a < 3; ++a) centroid[a] /= n;

    mesh.feature_names = {"curv", "radial"};
    mesh.features.resize(std::size_t(n) * 2);
    for (int i = 0; i < n; ++i) {
        const Vec3 v = mesh.vertex(i);
        const double dx = v[0] - centroid[0], dy = v[1] - centroid[1], dz = v[2] - centroid[2];
        mesh.features[2 * i] = defect[i];
        mesh.features[2 * i + 1] = std::sqrt(dx * dx + dy * dy + dz * dz);
    }
    mesh.validate();
}

std::vector<Mesh> synth_meshes(SynthKind kind, int n, std::uint64_t seed,
                               std::vector<int>* labels) {
    if (n < 1) throw ConfigError("dataset size must be >= 1");
    std::vector<Mesh> meshes;
    meshes.reserve(n);
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, "synth", std::uint64_t(i)));
        const Vec3 scales = {rng.next_range(0.6, 1.4), rng.next_range(0.6, 1.4),
                             rng.next_range(0.6, 1.4)};
        const Mat3 rot = random_rotation(rng);
        const bool box = kind == SynthKind::BoxesVsSpheres && i % 2 == 0;
        Mesh mesh = box ? make_box(scales, rot) : make_ellipsoid(scales, rot);
        add_synthetic_features(mesh);
        meshes.push_back(std::move(mesh));
        if (labels) labels->push_back(box ? 0 : 1);
    }
    return meshes;
}

std::vector<SynthItem> synth_dataset(SynthKind kind, int n, std::uint64_t seed,
                                     const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<int> labels;
    std::vector<Mesh> meshes = synth_meshes(kind, n, seed, &labels);

    std::vector<SynthItem> items;
    char stem[32];
    for (int i = 0; i < n; ++i) {
        std::snprintf(stem, sizeof(stem), "mesh_%04d", i);
        const std::string base = out_dir + "/" + stem;
        save_mesh_off(meshes[i], base + ".off");
        save_features_csv(meshes[i], base + ".features.csv");
        items.push_back(SynthItem{stem, labels[i]});
    }
    if (kind == SynthKind::BoxesVsSpheres) {
        std::ofstream out(out_dir + "/labels.csv");
        if (!out) throw DataError(out_dir + "/labels.csv: cannot open for writing");
        out << "mesh,label\n";
        for (const auto& item : items) out << item.stem << "," << item.label << "\n";
    }
    return items;
}

}  // namespace octmesh
