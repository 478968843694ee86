#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "surfflow/core.hpp"
#include "surfflow/lagrange.hpp"
#include "surfflow/quadrature.hpp"

namespace surfflow {

struct ReferenceTriangulation {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
    // Undirected edges as (min, max) vertex pairs, in first-appearance order.
    std::vector<std::array<int, 2>> edges;
    // The two incident triangles of each edge.
    std::vector<std::array<int, 2>> edge_tris;
    // Global edge id of each local edge (v0,v1), (v1,v2), (v2,v0).
    std::vector<std::array<int, 3>> tri_edges;

    int n_vertices() const { return int(vertices.size()); }
    int n_edges() const { return int(edges.size()); }
    int n_triangles() const { return int(triangles.size()); }
};

// Builds the edge tables and checks that the triangulation is a closed,
// consistently oriented manifold without degenerate triangles.
inline std::shared_ptr<const ReferenceTriangulation> make_reference(
    std::vector<Vec3> vertices, std::vector<std::array<int, 3>> triangles) {
    auto ref = std::make_shared<ReferenceTriangulation>();
    ref->vertices = std::move(vertices);
    ref->triangles = std::move(triangles);
    const int nv = ref->n_vertices();
    const int nt = ref->n_triangles();
    if (nt == 0) throw ConnectivityMismatch("triangulation has no triangles");

    for (int t = 0; t < nt; ++t) {
        auto& tri = ref->triangles[t];
        for (int v : tri)
            if (v < 0 || v >= nv)
                throw ConnectivityMismatch("triangle " + std::to_string(t) + " references vertex " +
                                           std::to_string(v) + " outside [0, " + std::to_string(nv) + ")");
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            throw ConnectivityMismatch("triangle " + std::to_string(t) + " has a repeated vertex");
    }

    std::map<std::array<int, 2>, int> edge_id;
    std::vector<std::array<int, 2>> dir_count;  // per edge: count of (min->max, max->min) uses
    ref->tri_edges.resize(nt);
    for (int t = 0; t < nt; ++t) {
        auto& tri = ref->triangles[t];
        for (int a = 0; a < 3; ++a) {
            int p = tri[a], q = tri[(a + 1) % 3];
            std::array<int, 2> key = {std::min(p, q), std::max(p, q)};
            auto [it, inserted] = edge_id.try_emplace(key, ref->n_edges());
            if (inserted) {
                ref->edges.push_back(key);
                ref->edge_tris.push_back({t, -1});
                dir_count.push_back({0, 0});
            } else if (ref->edge_tris[it->second][1] < 0 && ref->edge_tris[it->second][0] != t) {
                ref->edge_tris[it->second][1] = t;
            }
            int e = it->second;
            dir_count[e][p < q ? 0 : 1] += 1;
            ref->tri_edges[t][a] = e;
        }
    }
    for (int e = 0; e < ref->n_edges(); ++e) {
        int uses = dir_count[e][0] + dir_count[e][1];
        if (uses != 2)
            throw ConnectivityMismatch("edge (" + std::to_string(ref->edges[e][0]) + ", " +
                                       std::to_string(ref->edges[e][1]) + ") belongs to " +
                                       std::to_string(uses) + " triangles, expected 2 (closed manifold)");
        if (dir_count[e][0] != 1 || dir_count[e][1] != 1)
            throw ConnectivityMismatch("edge (" + std::to_string(ref->edges[e][0]) + ", " +
                                       std::to_string(ref->edges[e][1]) +
                                       ") traversed twice in the same direction (inconsistent orientation)");
    }
    return ref;
}

// Global numbering of the degree-k Lagrange nodes of a triangulation:
// [all vertices][per-edge interior nodes, ordered from the smaller to the
// larger global vertex id][per-triangle interior nodes in local order].
struct NodeLayout {
    std::shared_ptr<const ReferenceTriangulation> ref;
    int order = 1;
    int count = 0;
    int nb = 0;  // nodes per triangle
    std::vector<BaryIndex> local;
    std::vector<int> elem_dofs;  // flattened n_triangles x nb

    NodeLayout(std::shared_ptr<const ReferenceTriangulation> ref_, int order_)
        : ref(std::move(ref_)), order(order_), nb(nodes_per_triangle(order_)), local(local_nodes(order_)) {
        const int k = order;
        const int nv = ref->n_vertices(), ne = ref->n_edges(), nt = ref->n_triangles();
        const int per_edge = k - 1;
        const int per_tri = interior_nodes_per_triangle(k);
        count = nv + per_edge * ne + per_tri * nt;
        const int edge_base = nv;
        const int tri_base = nv + per_edge * ne;

        elem_dofs.resize(size_t(nt) * nb);
        for (int t = 0; t < nt; ++t) {
            auto& tri = ref->triangles[t];
            int* d = &elem_dofs[size_t(t) * nb];
            int a = 0;
            for (int v = 0; v < 3; ++v) d[a++] = tri[v];
            for (int le = 0; le < 3; ++le) {
                int p = tri[le], q = tri[(le + 1) % 3];
                int e = ref->tri_edges[t][le];
                for (int m = 1; m < k; ++m)
                    d[a++] = edge_base + e * per_edge + (p < q ? m - 1 : k - 1 - m);
            }
            for (int j = 0; j < per_tri; ++j) d[a++] = tri_base + t * per_tri + j;
        }
    }

    const int* dofs(int t) const { return &elem_dofs[size_t(t) * nb]; }
};

struct CurvedMesh {
    std::shared_ptr<const ReferenceTriangulation> ref;
    std::shared_ptr<const NodeLayout> layout;
    int order = 1;
    std::vector<Vec3> geom_nodes;  // one entry per layout node, shared across elements

    int n_elements() const { return ref->n_triangles(); }
    int n_nodes() const { return layout->count; }
    const int* element_dofs(int t) const { return layout->dofs(t); }
    const Vec3& node(int t, int local) const { return geom_nodes[layout->dofs(t)[local]]; }
};

// Positions of the degree-k Lagrange lattice of a piecewise-linear geometry.
inline std::vector<Vec3> lattice_nodes(const NodeLayout& layout, const std::vector<Vec3>& vertices) {
    const auto& ref = *layout.ref;
    const int k = layout.order;
    std::vector<Vec3> nodes(layout.count);
    for (int v = 0; v < ref.n_vertices(); ++v) nodes[v] = vertices[v];
    int idx = ref.n_vertices();
    for (int e = 0; e < ref.n_edges(); ++e) {
        const Vec3& a = vertices[ref.edges[e][0]];
        const Vec3& b = vertices[ref.edges[e][1]];
        for (int m = 1; m < k; ++m) nodes[idx++] = a + (double(m) / k) * (b - a);
    }
    const int per_tri = interior_nodes_per_triangle(k);
    for (int t = 0; t < ref.n_triangles(); ++t) {
        const Vec3& v0 = vertices[ref.triangles[t][0]];
        const Vec3& v1 = vertices[ref.triangles[t][1]];
        const Vec3& v2 = vertices[ref.triangles[t][2]];
        for (int j = 0; j < per_tri; ++j) {
            const BaryIndex& b = layout.local[layout.nb - per_tri + j];
            nodes[idx++] = (double(b.i) * v0 + double(b.j) * v1 + double(b.l) * v2) / k;
        }
    }
    return nodes;
}

// Longest edge of the current vertex skeleton.
inline double mesh_size(const CurvedMesh& mesh) {
    double h = 0;
    for (auto& e : mesh.ref->edges)
        h = std::max(h, (mesh.geom_nodes[e[0]] - mesh.geom_nodes[e[1]]).norm());
    return h;
}

// Throws if any element map loses rank at a quadrature point of `rule`.
inline void check_unfolded(const CurvedMesh& mesh, const QuadratureRule& rule) {
    BasisTable tab(mesh.order, rule.points);
    const int nb = mesh.layout->nb;
    for (int t = 0; t < mesh.n_elements(); ++t) {
        const int* dofs = mesh.element_dofs(t);
        double scale = 0;
        for (int le = 0; le < 3; ++le) {
            int e = mesh.ref->tri_edges[t][le];
            scale = std::max(scale, (mesh.geom_nodes[mesh.ref->edges[e][0]] -
                                     mesh.geom_nodes[mesh.ref->edges[e][1]])
                                        .squaredNorm());
        }
        for (int q = 0; q < rule.size(); ++q) {
            Vec3 txi = Vec3::Zero(), teta = Vec3::Zero();
            for (int a = 0; a < nb; ++a) {
                const Vec3& p = mesh.geom_nodes[dofs[a]];
                txi += tab.dxi(q, a) * p;
                teta += tab.deta(q, a) * p;
            }
            if (txi.cross(teta).norm() <= 1e-12 * scale)
                throw FoldedElement("element " + std::to_string(t) +
                                    " has a rank-deficient Jacobian at quadrature point " + std::to_string(q));
        }
    }
}

inline QuadratureRule default_rule(int order) { return quadrature_rule(std::min(2 * order + 2, 12)); }

// Order-k mesh interpolating a piecewise-linear geometry; if `transform` is
// given it is applied to every geometry node (e.g. projection onto a sphere).
template <class Transform = std::nullptr_t>
CurvedMesh from_linear(std::shared_ptr<const ReferenceTriangulation> ref, int order,
                       Transform transform = nullptr) {
    CurvedMesh mesh;
    mesh.ref = ref;
    mesh.order = order;
    mesh.layout = std::make_shared<NodeLayout>(ref, order);
    mesh.geom_nodes = lattice_nodes(*mesh.layout, ref->vertices);
    if constexpr (!std::is_same_v<Transform, std::nullptr_t>)
        for (auto& p : mesh.geom_nodes) p = transform(p);
    check_unfolded(mesh, default_rule(order));
    return mesh;
}

namespace detail {

inline void icosahedron(std::vector<Vec3>& verts, std::vector<std::array<int, 3>>& tris) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    verts = {{-1, t, 0}, {1, t, 0},   {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
             {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    for (auto& v : verts) v.normalize();
    tris = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
            {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
            {3, 8, 9},   {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    // Flip to outward orientation if the signed volume is negative.
    double vol = 0;
    for (auto& tr : tris) vol += verts[tr[0]].cross(verts[tr[1]]).dot(verts[tr[2]]);
    if (vol < 0)
        for (auto& tr : tris) std::swap(tr[1], tr[2]);
}

inline void subdivide_on_sphere(std::vector<Vec3>& verts, std::vector<std::array<int, 3>>& tris) {
    std::map<std::array<int, 2>, int> midpoint;
    auto mid = [&](int a, int b) {
        std::array<int, 2> key = {std::min(a, b), std::max(a, b)};
        auto [it, inserted] = midpoint.try_emplace(key, int(verts.size()));
        if (inserted) verts.push_back((0.5 * (verts[a] + verts[b])).normalized());
        return it->second;
    };
    std::vector<std::array<int, 3>> out;
    out.reserve(tris.size() * 4);
    for (auto& tr : tris) {
        int m01 = mid(tr[0], tr[1]), m12 = mid(tr[1], tr[2]), m20 = mid(tr[2], tr[0]);
        out.push_back({tr[0], m01, m20});
        out.push_back({tr[1], m12, m01});
        out.push_back({tr[2], m20, m12});
        out.push_back({m01, m12, m20});
    }
    tris = std::move(out);
}

}  // namespace detail

// Icosahedron subdivided `level` times with every degree-k geometry node
// radially projected onto the unit sphere.
inline CurvedMesh make_icosphere(int level, int order) {
    if (level < 0) throw ConfigError("refinement level must be >= 0");
    std::vector<Vec3> verts;
    std::vector<std::array<int, 3>> tris;
    detail::icosahedron(verts, tris);
    for (int l = 0; l < level; ++l) detail::subdivide_on_sphere(verts, tris);
    auto ref = make_reference(std::move(verts), std::move(tris));
    return from_linear(ref, order, [](const Vec3& p) { return Vec3(p.normalized()); });
}

// New mesh with geometry nodes shifted by `delta` (one 3-vector per node).
inline CurvedMesh displace(const CurvedMesh& mesh, const std::vector<Vec3>& delta) {
    if (int(delta.size()) != mesh.n_nodes())
        throw DimensionMismatch("displacement has " + std::to_string(delta.size()) + " nodes, mesh has " +
                                std::to_string(mesh.n_nodes()));
    CurvedMesh out;
    out.ref = mesh.ref;
    out.layout = mesh.layout;
    out.order = mesh.order;
    out.geom_nodes.resize(mesh.geom_nodes.size());
    for (size_t i = 0; i < delta.size(); ++i) out.geom_nodes[i] = mesh.geom_nodes[i] + delta[i];
    check_unfolded(out, default_rule(out.order));
    return out;
}

}  // namespace surfflow
