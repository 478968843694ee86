#pragma once

#include "surfflow/mesh.hpp"

namespace surfflow {

// Geometric data of a curved element map at one reference point.
struct GeometryFrame {
    Vec3 x = Vec3::Zero();        // position
    Mat32 J = Mat32::Zero();      // Jacobian of the element map
    Mat23 Jpinv = Mat23::Zero();  // Moore-Penrose pseudo-inverse (g^{-1} J^T)
    double sqrt_det_g = 0;        // area element
    Vec3 nu = Vec3::Zero();       // unit normal
    Mat3 P = Mat3::Zero();        // tangential projection I - nu nu^T
    Mat3 B = Mat3::Zero();        // shape operator -Grad_C nu, symmetrized
    double H = 0;                 // mean curvature trace(B)
};

// Frame from pre-evaluated basis data (row q of `tab`) on element t.
inline GeometryFrame frame_from_table(const CurvedMesh& mesh, int t, const BasisTable& tab, int q) {
    const int nb = mesh.layout->nb;
    const int* dofs = mesh.element_dofs(t);
    GeometryFrame f;
    Vec3 xxi = Vec3::Zero(), xeta = Vec3::Zero();
    Vec3 xii = Vec3::Zero(), xie = Vec3::Zero(), xee = Vec3::Zero();
    for (int a = 0; a < nb; ++a) {
        const Vec3& p = mesh.geom_nodes[dofs[a]];
        f.x += tab.value(q, a) * p;
        xxi += tab.dxi(q, a) * p;
        xeta += tab.deta(q, a) * p;
        xii += tab.hxx(q, a) * p;
        xie += tab.hxy(q, a) * p;
        xee += tab.hyy(q, a) * p;
    }
    f.J.col(0) = xxi;
    f.J.col(1) = xeta;
    Vec3 n = xxi.cross(xeta);
    f.sqrt_det_g = n.norm();
    double scale = std::max(xxi.squaredNorm(), xeta.squaredNorm());
    if (!(f.sqrt_det_g > 1e-14 * scale))
        throw DegenerateJacobian("element " + std::to_string(t) + " has rank-deficient Jacobian");
    f.nu = n / f.sqrt_det_g;
    f.P = Mat3::Identity() - f.nu * f.nu.transpose();

    Mat2 g = f.J.transpose() * f.J;
    Mat2 ginv;
    double det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
    ginv << g(1, 1), -g(0, 1), -g(1, 0), g(0, 0);
    ginv /= det;
    f.Jpinv = ginv * f.J.transpose();

    Mat32 dn;
    dn.col(0) = xii.cross(xeta) + xxi.cross(xie);
    dn.col(1) = xie.cross(xeta) + xxi.cross(xee);
    Mat32 dnu = (f.P * dn) / f.sqrt_det_g;
    Mat3 Braw = -(dnu * f.Jpinv);
    Mat3 Bt = f.P * Braw * f.P;
    f.B = 0.5 * (Bt + Bt.transpose());
    f.H = f.B.trace();
    return f;
}

inline GeometryFrame frame_at(const CurvedMesh& mesh, int t, const Vec2& ref_pt) {
    if (t < 0 || t >= mesh.n_elements())
        throw DimensionMismatch("element index " + std::to_string(t) + " out of range");
    BasisTable tab(mesh.order, {ref_pt});
    return frame_from_table(mesh, t, tab, 0);
}

// Pushes a reference-chart gradient (rows: d/dxi, d/deta) to the surface
// gradient with built-in right projection: for scalar data columns c,
// grad_C = (Jpinv)^T * ref_grad.
inline Vec3 push_gradient(const GeometryFrame& f, const Vec2& ref_grad) {
    return f.Jpinv.transpose() * ref_grad;
}

// Integral over the surface of a frame-dependent scalar integrand.
template <class F>
double integrate(const CurvedMesh& mesh, const QuadratureRule& rule, F&& integrand) {
    BasisTable tab(mesh.order, rule.points);
    double total = 0;
    for (int t = 0; t < mesh.n_elements(); ++t)
        for (int q = 0; q < rule.size(); ++q) {
            GeometryFrame f = frame_from_table(mesh, t, tab, q);
            total += rule.weights[q] * f.sqrt_det_g * integrand(f);
        }
    return total;
}

template <class F>
double integrate(const CurvedMesh& mesh, F&& integrand) {
    return integrate(mesh, default_rule(mesh.order), std::forward<F>(integrand));
}

inline double surface_area(const CurvedMesh& mesh) {
    return integrate(mesh, [](const GeometryFrame&) { return 1.0; });
}

}  // namespace surfflow
