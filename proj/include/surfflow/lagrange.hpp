#pragma once

#include <array>
#include <vector>

#include "surfflow/core.hpp"

namespace surfflow {

// Barycentric exponent triple of a Lagrange node of order k: the node sits at
// barycentric coordinates (i, j, l) / k relative to the reference vertices
// (0,0), (1,0), (0,1), with i + j + l = k.
struct BaryIndex {
    int i = 0, j = 0, l = 0;
};

constexpr int nodes_per_triangle(int order) {
    return (order + 1) * (order + 2) / 2;
}

constexpr int interior_nodes_per_triangle(int order) {
    return order >= 3 ? (order - 1) * (order - 2) / 2 : 0;
}

// Local node order: the three vertices, then the interior nodes of local edges
// (v0,v1), (v1,v2), (v2,v0) walked from first to second endpoint, then strictly
// interior nodes in lexicographic (xi, eta) order.
inline std::vector<BaryIndex> local_nodes(int order) {
    if (order < 1) throw UnsupportedDegree("element order must be >= 1, got " + std::to_string(order));
    const int k = order;
    std::vector<BaryIndex> nodes;
    nodes.reserve(nodes_per_triangle(k));
    nodes.push_back({k, 0, 0});
    nodes.push_back({0, k, 0});
    nodes.push_back({0, 0, k});
    for (int m = 1; m < k; ++m) nodes.push_back({k - m, m, 0});
    for (int m = 1; m < k; ++m) nodes.push_back({0, k - m, m});
    for (int m = 1; m < k; ++m) nodes.push_back({m, 0, k - m});
    for (int l = 1; l < k; ++l)
        for (int j = 1; j + l < k; ++j) nodes.push_back({k - j - l, j, l});
    return nodes;
}

inline Vec2 node_ref_point(int order, const BaryIndex& b) {
    return Vec2(double(b.j) / order, double(b.l) / order);
}

struct BasisEval {
    double value = 0.0;
    Vec2 grad = Vec2::Zero();
    Mat2 hess = Mat2::Zero();
};

namespace detail {

// Value and first two derivatives of the one-dimensional factor
// P_i(t) = prod_{m=0}^{i-1} (k t - m) / (i - m).
inline std::array<double, 3> silvester_factor(int i, int k, double t) {
    double p = 1.0, dp = 0.0, ddp = 0.0;
    for (int m = 0; m < i; ++m) {
        const double f = (k * t - m) / (i - m);
        const double df = double(k) / (i - m);
        ddp = ddp * f + 2.0 * dp * df;
        dp = dp * f + p * df;
        p = p * f;
    }
    return {p, dp, ddp};
}

}  // namespace detail

// Lagrange basis function attached to node `b` of the order-`order` simplex
// lattice, evaluated with derivatives in reference coordinates (xi, eta).
inline BasisEval eval_basis(int order, const BaryIndex& b, double xi, double eta) {
    const double lam[3] = {1.0 - xi - eta, xi, eta};
    const int idx[3] = {b.i, b.j, b.l};
    // Constant gradients of the barycentric coordinates in (xi, eta).
    static const double u[3][2] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};

    double p[3], dp[3], ddp[3];
    for (int m = 0; m < 3; ++m) {
        auto f = detail::silvester_factor(idx[m], order, lam[m]);
        p[m] = f[0];
        dp[m] = f[1];
        ddp[m] = f[2];
    }

    BasisEval out;
    out.value = p[0] * p[1] * p[2];

    double dlam[3];  // d(phi)/d(lam_m)
    dlam[0] = dp[0] * p[1] * p[2];
    dlam[1] = p[0] * dp[1] * p[2];
    dlam[2] = p[0] * p[1] * dp[2];

    double d2[3][3];  // d2(phi)/d(lam_m)d(lam_n)
    d2[0][0] = ddp[0] * p[1] * p[2];
    d2[1][1] = p[0] * ddp[1] * p[2];
    d2[2][2] = p[0] * p[1] * ddp[2];
    d2[0][1] = d2[1][0] = dp[0] * dp[1] * p[2];
    d2[0][2] = d2[2][0] = dp[0] * p[1] * dp[2];
    d2[1][2] = d2[2][1] = p[0] * dp[1] * dp[2];

    for (int m = 0; m < 3; ++m)
        for (int a = 0; a < 2; ++a) out.grad[a] += dlam[m] * u[m][a];
    for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 3; ++n)
            for (int a = 0; a < 2; ++a)
                for (int bb = 0; bb < 2; ++bb) out.hess(a, bb) += d2[m][n] * u[m][a] * u[n][bb];
    return out;
}

// All basis functions of one order tabulated at a fixed set of reference
// points. Row q of each matrix corresponds to point q, column a to local node a.
struct BasisTable {
    int order = 0;
    std::vector<BaryIndex> nodes;
    Eigen::MatrixXd value, dxi, deta, hxx, hxy, hyy;

    BasisTable() = default;
    BasisTable(int order_, const std::vector<Vec2>& points) : order(order_), nodes(local_nodes(order_)) {
        const int nq = int(points.size());
        const int nb = int(nodes.size());
        value.resize(nq, nb);
        dxi.resize(nq, nb);
        deta.resize(nq, nb);
        hxx.resize(nq, nb);
        hxy.resize(nq, nb);
        hyy.resize(nq, nb);
        for (int q = 0; q < nq; ++q)
            for (int a = 0; a < nb; ++a) {
                BasisEval e = eval_basis(order_, nodes[a], points[q][0], points[q][1]);
                value(q, a) = e.value;
                dxi(q, a) = e.grad[0];
                deta(q, a) = e.grad[1];
                hxx(q, a) = e.hess(0, 0);
                hxy(q, a) = e.hess(0, 1);
                hyy(q, a) = e.hess(1, 1);
            }
    }
};

}  // namespace surfflow
