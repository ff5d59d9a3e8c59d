#include "octmesh/mesh.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "octmesh/errors.hpp"

namespace octmesh {

namespace {

// Line-oriented reader that tracks line numbers for error messages and skips
// blank/comment lines.
class LineReader {
  public:
    LineReader(const std::string& path, char comment_char)
        : path_(path), in_(path), comment_(comment_char) {
        if (!in_) throw DataError(path + ": cannot open file");
    }

    // Next non-empty, non-comment line; false at EOF.
    bool next(std::string& out) {
        std::string line;
        while (std::getline(in_, line)) {
            ++lineno_;
            auto hash = line.find(comment_);
            if (hash != std::string::npos) line.erase(hash);
            if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
            out = line;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw DataError(path_ + ":" + std::to_string(lineno_) + ": " + msg);
    }

    int lineno() const { return lineno_; }

  private:
    std::string path_;
    std::ifstream in_;
    char comment_;
    int lineno_ = 0;
};

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream iss(s);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

double parse_double(const LineReader& r, const std::string& tok) {
    double v;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
        r.fail("expected a number, got '" + tok + "'");
    if (!std::isfinite(v)) r.fail("non-finite coordinate or feature value '" + tok + "'");
    return v;
}

long parse_long(const LineReader& r, const std::string& tok) {
    long v;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
        r.fail("expected an integer, got '" + tok + "'");
    return v;
}

Mesh load_off(const std::string& path) {
    LineReader r(path, '#');
    std::string line;
    if (!r.next(line)) r.fail("empty file");
    auto toks = split_ws(line);
    if (toks.empty() || toks[0] != "OFF") r.fail("expected OFF header");
    // counts may share the header line or follow it
    if (toks.size() == 1) {
        if (!r.next(line)) r.fail("missing counts line");
        toks = split_ws(line);
    } else {
        toks.erase(toks.begin());
    }
    if (toks.size() < 2) r.fail("expected 'nv nf [ne]' counts");
    long nv = parse_long(r, toks[0]);
    long nf = parse_long(r, toks[1]);
    if (nv < 0 || nf < 0) r.fail("negative element count");

    Mesh mesh;
    mesh.simplex_order = 3;
    mesh.vertices.reserve(std::size_t(nv) * 3);
    for (long i = 0; i < nv; ++i) {
        if (!r.next(line)) r.fail("unexpected end of file in vertex list");
        toks = split_ws(line);
        if (toks.size() < 3) r.fail("vertex line needs 3 coordinates");
        for (int j = 0; j < 3; ++j) mesh.vertices.push_back(parse_double(r, toks[j]));
    }
    mesh.simplices.reserve(std::size_t(nf) * 3);
    for (long i = 0; i < nf; ++i) {
        if (!r.next(line)) r.fail("unexpected end of file in face list");
        toks = split_ws(line);
        if (toks.empty()) r.fail("empty face line");
        long arity = parse_long(r, toks[0]);
        if (arity != 3) r.fail("face with " + std::to_string(arity) + " vertices (triangles only)");
        if (static_cast<long>(toks.size()) < 1 + arity) r.fail("truncated face line");
        for (int j = 0; j < 3; ++j) {
            long idx = parse_long(r, toks[1 + j]);
            if (idx < 0 || idx >= nv)
                r.fail("vertex index " + std::to_string(idx) + " out of range [0, " +
                       std::to_string(nv) + ")");
            mesh.simplices.push_back(static_cast<int>(idx));
        }
    }
    mesh.validate();
    return mesh;
}

Mesh load_tetgen(const std::string& path) {
    std::string node_path = path, stem = path;
    if (stem.size() >= 5 && stem.substr(stem.size() - 5) == ".node")
        stem = stem.substr(0, stem.size() - 5);
    else
        node_path = stem + ".node";
    std::string ele_path = stem + ".ele";

    Mesh mesh;
    mesh.simplex_order = 4;
    long index_base = 0;

    {
        LineReader r(node_path, '#');
        std::string line;
        if (!r.next(line)) r.fail("empty .node file");
        auto toks = split_ws(line);
        if (toks.empty()) r.fail("missing .node header");
        long nv = parse_long(r, toks[0]);
        if (nv < 0) r.fail("negative vertex count");
        mesh.vertices.reserve(std::size_t(nv) * 3);
        for (long i = 0; i < nv; ++i) {
            if (!r.next(line)) r.fail("unexpected end of file in node list");
            toks = split_ws(line);
            if (toks.size() < 4) r.fail("node line needs 'index x y z'");
            long idx = parse_long(r, toks[0]);
            if (i == 0) {
                if (idx != 0 && idx != 1) r.fail("first node index must be 0 or 1");
                index_base = idx;
            }
            if (idx != i + index_base) r.fail("non-sequential node index");
            for (int j = 0; j < 3; ++j) mesh.vertices.push_back(parse_double(r, toks[1 + j]));
        }
    }
    {
        LineReader r(ele_path, '#');
        std::string line;
        if (!r.next(line)) r.fail("empty .ele file");
        auto toks = split_ws(line);
        if (toks.empty()) r.fail("missing .ele header");
        long ns = parse_long(r, toks[0]);
        long nodes_per = toks.size() > 1 ? parse_long(r, toks[1]) : 4;
        if (nodes_per != 4)
            r.fail("tetrahedra must have 4 corners, header declares " + std::to_string(nodes_per));
        const long nv = mesh.vertex_count();
        mesh.simplices.reserve(std::size_t(ns) * 4);
        for (long i = 0; i < ns; ++i) {
            if (!r.next(line)) r.fail("unexpected end of file in element list");
            toks = split_ws(line);
            if (toks.size() < 5) r.fail("element line needs 'index a b c d'");
            for (int j = 0; j < 4; ++j) {
                long idx = parse_long(r, toks[1 + j]) - index_base;
                if (idx < 0 || idx >= nv)
                    r.fail("vertex index " + std::to_string(idx + index_base) +
                           " out of range for " + std::to_string(nv) + " nodes");
                mesh.simplices.push_back(static_cast<int>(idx));
            }
        }
    }
    mesh.validate();
    return mesh;
}

}  // namespace

void Mesh::validate() const {
    if (vertices.size() % 3 != 0) throw DataError("vertex array not a multiple of 3");
    if (simplex_order != 3 && simplex_order != 4)
        throw DataError("simplex order must be 3 or 4, got " + std::to_string(simplex_order));
    if (simplices.size() % simplex_order != 0)
        throw DataError("simplex array length incompatible with uniform arity " +
                        std::to_string(simplex_order));
    const int n = vertex_count();
    for (int idx : simplices)
        if (idx < 0 || idx >= n)
            throw DataError("simplex vertex index " + std::to_string(idx) + " out of range [0, " +
                            std::to_string(n) + ")");
    for (double v : vertices)
        if (!std::isfinite(v)) throw DataError("non-finite vertex coordinate");
    const int f = feature_dim();
    if (features.size() != std::size_t(n) * f)
        throw DataError("feature table has " + std::to_string(f == 0 ? 0 : features.size() / f) +
                        " rows for " + std::to_string(n) + " vertices");
    for (double v : features)
        if (!std::isfinite(v)) throw DataError("non-finite feature value");
    std::set<std::string> names(feature_names.begin(), feature_names.end());
    if (names.size() != feature_names.size()) throw DataError("duplicate feature channel name");
}

Mesh load_mesh(const std::string& path, MeshFormat format) {
    return format == MeshFormat::Off ? load_off(path) : load_tetgen(path);
}

void load_features(const std::string& path, Mesh& mesh) {
    LineReader r(path, '\0');
    std::string line;
    if (!r.next(line)) r.fail("empty feature file (header row required)");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> names;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) names.push_back(cell);
    }
    std::set<std::string> unique_names(names.begin(), names.end());
    if (unique_names.size() != names.size()) r.fail("duplicate channel name in header");
    const int f = static_cast<int>(names.size());
    const int n = mesh.vertex_count();

    std::vector<double> table;
    table.reserve(std::size_t(n) * f);
    int rows = 0;
    while (r.next(line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::stringstream ss(line);
        std::string cell;
        int cols = 0;
        while (std::getline(ss, cell, ',')) {
            table.push_back(parse_double(r, cell));
            ++cols;
        }
        if (cols != f)
            r.fail("row has " + std::to_string(cols) + " cells, header declares " +
                   std::to_string(f));
        ++rows;
    }
    if (rows != n)
        throw DataError(path + ": " + std::to_string(rows) + " feature rows for " +
                        std::to_string(n) + " vertices");
    mesh.feature_names = std::move(names);
    mesh.features = std::move(table);
    mesh.validate();
}

void save_mesh_off(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError(path + ": cannot open for writing");
    out << "OFF\n" << mesh.vertex_count() << " " << mesh.simplex_count() << " 0\n";
    char buf[96];
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        auto v = mesh.vertex(i);
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", v[0], v[1], v[2]);
        out << buf;
    }
    for (int s = 0; s < mesh.simplex_count(); ++s) {
        const int* t = mesh.simplex(s);
        out << mesh.simplex_order;
        for (int j = 0; j < mesh.simplex_order; ++j) out << " " << t[j];
        out << "\n";
    }
    if (!out) throw DataError(path + ": write failure");
}

void save_features_csv(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError(path + ": cannot open for writing");
    const int f = mesh.feature_dim();
    for (int j = 0; j < f; ++j) out << (j ? "," : "") << mesh.feature_names[j];
    out << "\n";
    char buf[40];
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        const double* row = mesh.feature_row(i);
        for (int j = 0; j < f; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", row[j]);
            out << (j ? "," : "") << buf;
        }
        out << "\n";
    }
    if (!out) throw DataError(path + ": write failure");
}

void save_points_ply(const std::vector<Vec3>& points,
                     const std::vector<std::array<std::uint8_t, 3>>* colors,
                     const std::string& path) {
    if (colors && colors->size() != points.size())
        throw DataError("color count " + std::to_string(colors->size()) +
                        " does not match point count " + std::to_string(points.size()));
    std::ofstream out(path);
    if (!out) throw DataError(path + ": cannot open for writing");
    out << "ply\nformat ascii 1.0\nelement vertex " << points.size() << "\n"
        << "property float x\nproperty float y\nproperty float z\n";
    if (colors)
        out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out << "end_header\n";
    char buf[96];
    for (std::size_t i = 0; i < points.size(); ++i) {
        // %.9g round-trips float32 exactly
        std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g", double(float(points[i][0])),
                      double(float(points[i][1])), double(float(points[i][2])));
        out << buf;
        if (colors)
            out << " " << int((*colors)[i][0]) << " " << int((*colors)[i][1]) << " "
                << int((*colors)[i][2]);
        out << "\n";
    }
    if (!out) throw DataError(path + ": write failure");
}

std::vector<Vec3> load_points_ply(const std::string& path) {
    LineReader r(path, '\0');
    std::string line;
    if (!r.next(line) || split_ws(line) != std::vector<std::string>{"ply"})
        r.fail("expected ply header");
    long nv = -1;
    while (r.next(line)) {
        auto toks = split_ws(line);
        if (toks.size() == 3 && toks[0] == "element" && toks[1] == "vertex")
            nv = parse_long(r, toks[2]);
        if (!toks.empty() && toks[0] == "end_header") break;
    }
    if (nv < 0) r.fail("missing vertex element declaration");
    std::vector<Vec3> points;
    points.reserve(nv);
    for (long i = 0; i < nv; ++i) {
        if (!r.next(line)) r.fail("unexpected end of file in vertex list");
        auto toks = split_ws(line);
        if (toks.size() < 3) r.fail("vertex line needs 3 coordinates");
        points.push_back({parse_double(r, toks[0]), parse_double(r, toks[1]),
                          parse_double(r, toks[2])});
    }
    return points;
}

}  // namespace octmesh
