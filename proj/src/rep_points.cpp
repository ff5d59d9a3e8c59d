#include "octmesh/rep_points.hpp"

#include <algorithm>

#include "octmesh/errors.hpp"

namespace octmesh {

const char* to_string(RepPointKind k) {
    switch (k) {
        case RepPointKind::Vertices: return "vertices";
        case RepPointKind::EdgeMidpoints: return "edge-midpoints";
        case RepPointKind::FaceCentroids: return "face-centroids";
        case RepPointKind::CellCentroids: return "cell-centroids";
    }
    return "?";
}

RepPointKind rep_point_kind_from_string(const std::string& s) {
    if (s == "vertices") return RepPointKind::Vertices;
    if (s == "edge-midpoints") return RepPointKind::EdgeMidpoints;
    if (s == "face-centroids") return RepPointKind::FaceCentroids;
    if (s == "cell-centroids") return RepPointKind::CellCentroids;
    throw ConfigError("unknown representative-point kind '" + s + "'");
}

namespace {

// Emit one point as the mean of `count` mesh vertices, features averaged
// the same way.
void emit_mean(const Mesh& mesh, const int* ids, int count, std::int64_t source,
               RepPointSet& out) {
    double p[3] = {0, 0, 0};
    for (int j = 0; j < count; ++j) {
        auto v = mesh.vertex(ids[j]);
        p[0] += v[0];
        p[1] += v[1];
        p[2] += v[2];
    }
    const double inv = 1.0 / count;
    out.points.push_back(p[0] * inv);
    out.points.push_back(p[1] * inv);
    out.points.push_back(p[2] * inv);
    const int f = mesh.feature_dim();
    for (int c = 0; c < f; ++c) {
        double acc = 0;
        for (int j = 0; j < count; ++j) acc += mesh.feature_row(ids[j])[c];
        out.features.push_back(acc * inv);
    }
    out.source.push_back(source);
}

std::vector<std::array<int, 3>> unique_faces(const Mesh& mesh) {
    // tetrahedron faces as sorted triples, deduplicated
    static const int face_corners[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
    std::vector<std::array<int, 3>> faces;
    faces.reserve(std::size_t(mesh.simplex_count()) * 4);
    for (int s = 0; s < mesh.simplex_count(); ++s) {
        const int* t = mesh.simplex(s);
        for (const auto& fc : face_corners) {
            std::array<int, 3> f = {t[fc[0]], t[fc[1]], t[fc[2]]};
            std::sort(f.begin(), f.end());
            faces.push_back(f);
        }
    }
    std::sort(faces.begin(), faces.end());
    faces.erase(std::unique(faces.begin(), faces.end()), faces.end());
    return faces;
}

}  // namespace

std::vector<std::array<int, 2>> unique_edges(const Mesh& mesh) {
    const int k = mesh.simplex_order;
    std::vector<std::array<int, 2>> edges;
    edges.reserve(std::size_t(mesh.simplex_count()) * k * (k - 1) / 2);
    for (int s = 0; s < mesh.simplex_count(); ++s) {
        const int* t = mesh.simplex(s);
        for (int a = 0; a < k; ++a)
            for (int b = a + 1; b < k; ++b)
                edges.push_back({std::min(t[a], t[b]), std::max(t[a], t[b])});
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

RepPointSet rep_points(const Mesh& mesh, RepPointKind kind) {
    RepPointSet out;
    out.kind = kind;
    out.feature_dim = mesh.feature_dim();

    if (kind == RepPointKind::Vertices) {
        out.points = mesh.vertices;
        out.features = mesh.features;
        out.source.resize(mesh.vertex_count());
        for (int i = 0; i < mesh.vertex_count(); ++i) out.source[i] = i;
        return out;
    }

    if (mesh.simplex_count() == 0)
        throw DataError("mesh has no simplices; cannot derive " + std::string(to_string(kind)));

    switch (kind) {
        case RepPointKind::CellCentroids: {
            if (mesh.simplex_order != 4)
                throw DataError("cell-centroids requires a tetrahedral mesh (order 4), got order " +
                                std::to_string(mesh.simplex_order));
            for (int s = 0; s < mesh.simplex_count(); ++s)
                emit_mean(mesh, mesh.simplex(s), 4, s, out);
            break;
        }
        case RepPointKind::FaceCentroids: {
            if (mesh.simplex_order == 3) {
                for (int s = 0; s < mesh.simplex_count(); ++s)
                    emit_mean(mesh, mesh.simplex(s), 3, s, out);
            } else {
                auto faces = unique_faces(mesh);
                for (std::size_t i = 0; i < faces.size(); ++i)
                    emit_mean(mesh, faces[i].data(), 3, static_cast<std::int64_t>(i), out);
            }
            break;
        }
        case RepPointKind::EdgeMidpoints: {
            auto edges = unique_edges(mesh);
            for (std::size_t i = 0; i < edges.size(); ++i)
                emit_mean(mesh, edges[i].data(), 2, static_cast<std::int64_t>(i), out);
            break;
        }
        case RepPointKind::Vertices:
            break;  // handled above
    }
    return out;
}

}  // namespace octmesh
