#pragma once

#include "surfflow/fields.hpp"
#include "surfflow/sparse.hpp"

namespace surfflow {

// Mass matrix on `components` stacked copies of the space (interleaved dofs).
inline Eigen::SparseMatrix<double> assemble_mass(const ScalarSpace& space, int components,
                                                 const QuadratureRule& rule) {
    const auto& mesh = space.mesh;
    BasisTable geom_tab(mesh.order, rule.points);
    BasisTable tab(space.order, rule.points);
    const int nb = space.nb;
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(size_t(mesh.n_elements()) * nb * nb * components);
    Eigen::MatrixXd local(nb, nb);
    for (int t = 0; t < mesh.n_elements(); ++t) {
        local.setZero();
        for (int q = 0; q < rule.size(); ++q) {
            GeometryFrame fr = frame_from_table(mesh, t, geom_tab, q);
            double w = rule.weights[q] * fr.sqrt_det_g;
            for (int a = 0; a < nb; ++a)
                for (int b = 0; b < nb; ++b) local(a, b) += w * tab.value(q, a) * tab.value(q, b);
        }
        const int* d = space.dofs(t);
        for (int a = 0; a < nb; ++a)
            for (int b = 0; b < nb; ++b)
                for (int c = 0; c < components; ++c)
                    entries.emplace_back(components * d[a] + c, components * d[b] + c, local(a, b));
    }
    Eigen::SparseMatrix<double> M(components * space.dof_count, components * space.dof_count);
    M.setFromTriplets(entries.begin(), entries.end());
    return M;
}

// Stiffness matrix of the componentwise surface gradient,
// (Grad_C phi_i, Grad_C phi_j); identical per component.
inline Eigen::SparseMatrix<double> assemble_stiffness(const ScalarSpace& space, int components,
                                                      const QuadratureRule& rule) {
    const auto& mesh = space.mesh;
    BasisTable geom_tab(mesh.order, rule.points);
    BasisTable tab(space.order, rule.points);
    const int nb = space.nb;
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(size_t(mesh.n_elements()) * nb * nb * components);
    Eigen::MatrixXd local(nb, nb);
    std::vector<Vec3> g(nb);
    for (int t = 0; t < mesh.n_elements(); ++t) {
        local.setZero();
        for (int q = 0; q < rule.size(); ++q) {
            GeometryFrame fr = frame_from_table(mesh, t, geom_tab, q);
            double w = rule.weights[q] * fr.sqrt_det_g;
            for (int a = 0; a < nb; ++a)
                g[a] = grad_C_scalar(fr, Vec2(tab.dxi(q, a), tab.deta(q, a)));
            for (int a = 0; a < nb; ++a)
                for (int b = 0; b < nb; ++b) local(a, b) += w * g[a].dot(g[b]);
        }
        const int* d = space.dofs(t);
        for (int a = 0; a < nb; ++a)
            for (int b = 0; b < nb; ++b)
                for (int c = 0; c < components; ++c)
                    entries.emplace_back(components * d[a] + c, components * d[b] + c, local(a, b));
    }
    Eigen::SparseMatrix<double> K(components * space.dof_count, components * space.dof_count);
    K.setFromTriplets(entries.begin(), entries.end());
    return K;
}

// Load vector of a frame-dependent scalar density against all basis functions.
template <class F>
Eigen::VectorXd assemble_load(const ScalarSpace& space, const QuadratureRule& rule, F&& density) {
    const auto& mesh = space.mesh;
    BasisTable geom_tab(mesh.order, rule.points);
    BasisTable tab(space.order, rule.points);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(space.dof_count);
    for (int t = 0; t < mesh.n_elements(); ++t) {
        const int* d = space.dofs(t);
        for (int q = 0; q < rule.size(); ++q) {
            GeometryFrame fr = frame_from_table(mesh, t, geom_tab, q);
            double w = rule.weights[q] * fr.sqrt_det_g * density(fr);
            for (int a = 0; a < space.nb; ++a) b[d[a]] += w * tab.value(q, a);
        }
    }
    return b;
}

// L2 projection of a position function onto the space (scalar fields).
template <class F>
DiscreteField project_l2(std::shared_ptr<const ScalarSpace> space, const QuadratureRule& rule, F&& f) {
    auto M = assemble_mass(*space, 1, rule);
    Eigen::VectorXd b = assemble_load(*space, rule, [&](const GeometryFrame& fr) { return f(fr.x); });
    DiscreteField out(space, 1);
    out.coeff = solve_direct(M, b);
    return out;
}

}  // namespace surfflow
