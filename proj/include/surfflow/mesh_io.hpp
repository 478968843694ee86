#pragma once

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "surfflow/mesh.hpp"

namespace surfflow {

struct LinearMeshData {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
};

namespace detail {

struct TokenStream {
    std::string path;
    std::vector<std::pair<std::string, int>> tokens;  // token, line number
    size_t pos = 0;

    explicit TokenStream(const std::string& path_) : path(path_) {
        std::ifstream in(path_);
        if (!in) throw IoError("cannot open '" + path_ + "'");
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.resize(hash);
            std::istringstream ls(line);
            std::string tok;
            while (ls >> tok) tokens.emplace_back(tok, lineno);
        }
    }

    bool done() const { return pos >= tokens.size(); }
    int line() const { return done() ? (tokens.empty() ? 0 : tokens.back().second) : tokens[pos].second; }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(path + ":" + std::to_string(line()) + ": " + msg);
    }

    std::string next(const char* what) {
        if (done()) fail(std::string("unexpected end of file, expected ") + what);
        return tokens[pos++].first;
    }

    long integer(const char* what) {
        std::string t = next(what);
        long v = 0;
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc() || p != t.data() + t.size())
            fail("expected integer " + std::string(what) + ", got '" + t + "'");
        return v;
    }

    double real(const char* what) {
        std::string t = next(what);
        try {
            size_t used = 0;
            double v = std::stod(t, &used);
            if (used != t.size()) throw std::invalid_argument(t);
            return v;
        } catch (const std::exception&) {
            fail("expected number " + std::string(what) + ", got '" + t + "'");
        }
    }
};

inline LinearMeshData read_off(const std::string& path) {
    TokenStream ts(path);
    std::string magic = ts.next("OFF header");
    if (magic != "OFF") ts.fail("expected OFF header, got '" + magic + "'");
    long nv = ts.integer("vertex count");
    long nf = ts.integer("face count");
    ts.integer("edge count");
    if (nv < 3 || nf < 1) ts.fail("implausible counts in OFF header");
    LinearMeshData data;
    data.vertices.reserve(nv);
    for (long i = 0; i < nv; ++i) {
        double x = ts.real("x"), y = ts.real("y"), z = ts.real("z");
        data.vertices.emplace_back(x, y, z);
    }
    data.triangles.reserve(nf);
    for (long f = 0; f < nf; ++f) {
        long n = ts.integer("face size");
        if (n != 3) ts.fail("only triangle faces supported, got face of size " + std::to_string(n));
        std::array<int, 3> tri;
        for (int a = 0; a < 3; ++a) {
            long v = ts.integer("vertex index");
            if (v < 0 || v >= nv) ts.fail("vertex index " + std::to_string(v) + " out of range");
            tri[a] = int(v);
        }
        data.triangles.push_back(tri);
    }
    return data;
}

inline LinearMeshData read_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    LinearMeshData data;
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& msg) -> void {
        throw ParseError(path + ":" + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (key == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z)) fail("malformed vertex line");
            data.vertices.emplace_back(x, y, z);
        } else if (key == "f") {
            std::vector<int> idx;
            std::string t;
            while (ls >> t) {
                std::string head = t.substr(0, t.find('/'));
                long v = 0;
                auto [p, ec] = std::from_chars(head.data(), head.data() + head.size(), v);
                if (ec != std::errc() || p != head.data() + head.size())
                    fail("malformed face vertex '" + t + "'");
                if (v < 0) v = long(data.vertices.size()) + v + 1;
                if (v < 1 || v > long(data.vertices.size()))
                    fail("face vertex index " + std::to_string(v) + " out of range");
                idx.push_back(int(v - 1));
            }
            if (idx.size() != 3) fail("only triangle faces supported, got face of size " + std::to_string(idx.size()));
            data.triangles.push_back({idx[0], idx[1], idx[2]});
        }
        // all other keys (vn, vt, usemtl, o, g, s, mtllib, ...) are ignored
    }
    if (data.triangles.empty()) throw ParseError(path + ": no triangle faces found");
    return data;
}

inline bool ends_with_nocase(const std::string& s, const std::string& suffix) {
    if (s.size() < suffix.size()) return false;
    for (size_t i = 0; i < suffix.size(); ++i)
        if (std::tolower((unsigned char)s[s.size() - suffix.size() + i]) != suffix[i]) return false;
    return true;
}

}  // namespace detail

inline LinearMeshData read_linear_mesh(const std::string& path) {
    if (detail::ends_with_nocase(path, ".off")) return detail::read_off(path);
    if (detail::ends_with_nocase(path, ".obj")) return detail::read_obj(path);
    throw ParseError(path + ": unrecognized mesh format (expected .off or .obj)");
}

// Writes the linear vertex skeleton (vertex geometry nodes + triangles).
inline void write_linear_mesh(const std::string& path, const CurvedMesh& mesh) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out.precision(17);
    const auto& ref = *mesh.ref;
    if (detail::ends_with_nocase(path, ".off")) {
        out << "OFF\n" << ref.n_vertices() << ' ' << ref.n_triangles() << ' ' << ref.n_edges() << '\n';
        for (int v = 0; v < ref.n_vertices(); ++v) {
            const Vec3& p = mesh.geom_nodes[v];
            out << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
        }
        for (auto& t : ref.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    } else if (detail::ends_with_nocase(path, ".obj")) {
        for (int v = 0; v < ref.n_vertices(); ++v) {
            const Vec3& p = mesh.geom_nodes[v];
            out << "v " << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
        }
        for (auto& t : ref.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    } else {
        throw ParseError(path + ": unrecognized mesh format (expected .off or .obj)");
    }
    if (!out) throw IoError("write to '" + path + "' failed");
}

// Loads an ordered mesh sequence sharing one connectivity, elevated to order k.
inline std::vector<CurvedMesh> load_mesh_sequence(const std::vector<std::string>& paths, int order) {
    if (paths.empty()) throw IoError("mesh sequence is empty");
    std::vector<CurvedMesh> meshes;
    meshes.reserve(paths.size());
    LinearMeshData first = read_linear_mesh(paths[0]);
    auto ref = make_reference(first.vertices, first.triangles);
    auto layout = std::make_shared<NodeLayout>(ref, order);
    for (size_t i = 0; i < paths.size(); ++i) {
        LinearMeshData data = i == 0 ? std::move(first) : read_linear_mesh(paths[i]);
        if (int(data.vertices.size()) != ref->n_vertices())
            throw ConnectivityMismatch(paths[i] + ": vertex count " + std::to_string(data.vertices.size()) +
                                       " differs from first file (" + std::to_string(ref->n_vertices()) + ")");
        if (data.triangles != ref->triangles)
            throw ConnectivityMismatch(paths[i] + ": triangle list differs from first file");
        CurvedMesh mesh;
        mesh.ref = ref;
        mesh.layout = layout;
        mesh.order = order;
        mesh.geom_nodes = lattice_nodes(*layout, data.vertices);
        check_unfolded(mesh, default_rule(order));
        meshes.push_back(std::move(mesh));
    }
    return meshes;
}

}  // namespace surfflow
