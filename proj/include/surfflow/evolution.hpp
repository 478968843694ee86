#pragma once

#include <functional>

#include "surfflow/assembly.hpp"

namespace surfflow {

// Normal velocity law V0(H)(x, t) = alpha * H(x) + forcing(x, t).
struct NormalVelocitySpec {
    double alpha = 1e-3;
    std::function<double(const Vec3&, double)> forcing;
};

struct EvolutionState {
    CurvedMesh mesh;
    DiscreteField H;
    double t = 0;
};

struct MoveResult {
    DiscreteField Y;
    DiscreteField H_new;
    CurvedMesh mesh_new;
    int iterations = 0;
};

// Discrete normal field: elementwise frame normals averaged at shared nodes
// (deterministic element order) and renormalized.
inline DiscreteField nodal_normals(std::shared_ptr<const ScalarSpace> space) {
    const auto& mesh = space->mesh;
    DiscreteField out(space, 3);
    BasisTable geom_tab(mesh.order, space->local_ref_points());
    for (int t = 0; t < mesh.n_elements(); ++t) {
        const int* d = space->dofs(t);
        for (int j = 0; j < space->nb; ++j) {
            GeometryFrame fr = frame_from_table(mesh, t, geom_tab, j);
            out.set_vec(d[j], out.vec(d[j]) + fr.nu);
        }
    }
    for (int i = 0; i < space->dof_count; ++i) {
        Vec3 v = out.vec(i);
        double len = v.norm();
        if (len < 1e-12) throw DegenerateJacobian("node " + std::to_string(i) + " has vanishing averaged normal");
        out.set_vec(i, v / len);
    }
    return out;
}

// Weak mean curvature: solve (H nu_h, phi_i nu_h)_h = -(Grad_C X, Grad_C (phi_i nu_h))_h,
// the scalar-test reduction of (H nu_h, Z) = -(Grad_C X, Grad_C Z).
inline DiscreteField init_curvature(const CurvedMesh& mesh, int order, const QuadratureRule& rule) {
    auto space = build_space(mesh, order);
    BasisTable geom_tab(mesh.order, rule.points);
    BasisTable tab(space->order, rule.points);
    const int nb = space->nb;
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(size_t(mesh.n_elements()) * nb * nb);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(space->dof_count);
    Eigen::MatrixXd mloc(nb, nb);
    Eigen::VectorXd rloc(nb);
    std::vector<Vec3> g(nb);
    for (int t = 0; t < mesh.n_elements(); ++t) {
        mloc.setZero();
        rloc.setZero();
        for (int q = 0; q < rule.size(); ++q) {
            GeometryFrame fr = frame_from_table(mesh, t, geom_tab, q);
            double w = rule.weights[q] * fr.sqrt_det_g;
            Mat3 gradX = fr.J * fr.Jpinv;  // Grad_C of the position field
            Vec3 gXnu = gradX * fr.nu;
            double gXB = gradX.cwiseProduct(fr.B).sum();
            for (int a = 0; a < nb; ++a)
                g[a] = grad_C_scalar(fr, Vec2(tab.dxi(q, a), tab.deta(q, a)));
            for (int a = 0; a < nb; ++a) {
                rloc[a] += w * (-gXnu.dot(g[a]) + tab.value(q, a) * gXB);
                for (int b = 0; b < nb; ++b) mloc(a, b) += w * tab.value(q, a) * tab.value(q, b);
            }
        }
        const int* d = space->dofs(t);
        for (int a = 0; a < nb; ++a) {
            rhs[d[a]] += rloc[a];
            for (int b = 0; b < nb; ++b) entries.emplace_back(d[a], d[b], mloc(a, b));
        }
    }
    Eigen::SparseMatrix<double> M(space->dof_count, space->dof_count);
    M.setFromTriplets(entries.begin(), entries.end());
    DiscreteField H(space, 1);
    H.coeff = solve_direct(M, rhs);
    return H;
}

inline DiscreteField init_curvature(const CurvedMesh& mesh) {
    return init_curvature(mesh, mesh.order, default_rule(mesh.order));
}

// Globally area-conserving velocity V = V0 - (int V0 H / int H).
inline DiscreteField area_conserving_velocity(const DiscreteField& V0, const DiscreteField& H,
                                              const CurvedMesh& mesh, const QuadratureRule& rule) {
    if (V0.components != 1 || H.components != 1)
        throw DimensionMismatch("area_conserving_velocity expects scalar fields");
    BasisTable geom_tab(mesh.order, rule.points);
    BasisTable tab(V0.space->order, rule.points);
    double IH = 0, IVH = 0, area = 0;
    for (int t = 0; t < mesh.n_elements(); ++t)
        for (int q = 0; q < rule.size(); ++q) {
            GeometryFrame fr = frame_from_table(mesh, t, geom_tab, q);
            double w = rule.weights[q] * fr.sqrt_det_g;
            double h = eval_scalar(H, t, tab, q);
            area += w;
            IH += w * h;
            IVH += w * h * eval_scalar(V0, t, tab, q);
        }
    if (std::abs(IH) <= 1e-12 * area / mesh_size(mesh))
        throw ZeroMeanCurvature("integral of H is " + std::to_string(IH) +
                                ", too close to zero for the area correction");
    DiscreteField V = V0;
    V.coeff.array() -= IVH / IH;
    return V;
}

namespace detail {

// One mesh-movement step on fixed geometry: solves the coupled system
//   (Y.nu_h, w)_h - tau*alpha*(H', w)_h = (tau*f - c, w)_h          for w in V_k,
//   (H' nu_h, Z)_h + (Grad_C Y, Grad_C Z)_h = -(Grad_C X, Grad_C Z)_h  for Z in V_k^3,
// iterating on the accumulated area-correction constant c. The residual
// delta^j = int Y^j.nu H^j / int H^j of the area constraint is driven below
// eps*sqrt(area) by c^{j+1} = c^j + delta^{j+1}; a non-accumulated update
// would stall at the uncorrected residual and never meet the criterion.
template <class ForcingQp>
MoveResult move_step_core(const CurvedMesh& mesh, double alpha, double tau, double eps, int max_iter,
                          ForcingQp&& forcing_qp, const QuadratureRule& rule) {
    if (!(tau > 0)) throw ConfigError("time step must be positive");
    if (!(eps > 0)) throw ConfigError("fixed-point tolerance must be positive");
    auto space = build_space(mesh, mesh.order);
    const int n = space->dof_count;
    const int nb = space->nb;
    const int nq = rule.size();
    BasisTable geom_tab(mesh.order, rule.points);
    const BasisTable& tab = geom_tab;  // space order equals geometry order

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(size_t(mesh.n_elements()) * nb * nb * 16);
    Eigen::VectorXd rhs_fixed = Eigen::VectorXd::Zero(4 * n);
    Eigen::VectorXd load = Eigen::VectorXd::Zero(n);  // (1, phi_i)_h
    std::vector<double> wsg(size_t(mesh.n_elements()) * nq);
    std::vector<Vec3> nus(size_t(mesh.n_elements()) * nq);
    double area = 0;

    Eigen::MatrixXd kloc(nb, nb), mloc(nb, nb);
    std::array<Eigen::MatrixXd, 3> wloc;
    for (auto& wl : wloc) wl.resize(nb, nb);
    Eigen::MatrixXd rloc(nb, 3);
    Eigen::VectorXd floc(nb), lloc(nb);
    std::vector<Vec3> g(nb);

    for (int t = 0; t < mesh.n_elements(); ++t) {
        kloc.setZero();
        mloc.setZero();
        for (auto& wl : wloc) wl.setZero();
        rloc.setZero();
        floc.setZero();
        lloc.setZero();
        for (int q = 0; q < nq; ++q) {
            GeometryFrame fr = frame_from_table(mesh, t, geom_tab, q);
            double w = rule.weights[q] * fr.sqrt_det_g;
            wsg[size_t(t) * nq + q] = w;
            nus[size_t(t) * nq + q] = fr.nu;
            area += w;
            double f = forcing_qp(t, q, fr);
            for (int a = 0; a < nb; ++a)
                g[a] = grad_C_scalar(fr, Vec2(tab.dxi(q, a), tab.deta(q, a)));
            for (int a = 0; a < nb; ++a) {
                double va = tab.value(q, a);
                Vec3 pg = fr.P * g[a];
                for (int c = 0; c < 3; ++c) rloc(a, c) -= w * pg[c];
                floc[a] += w * va * f;
                lloc[a] += w * va;
                for (int b = 0; b < nb; ++b) {
                    double vb = tab.value(q, b);
                    kloc(a, b) += w * g[a].dot(g[b]);
                    mloc(a, b) += w * va * vb;
                    for (int c = 0; c < 3; ++c) wloc[c](a, b) += w * va * vb * fr.nu[c];
                }
            }
        }
        const int* d = space->dofs(t);
        for (int a = 0; a < nb; ++a) {
            for (int c = 0; c < 3; ++c) rhs_fixed[3 * d[a] + c] += rloc(a, c);
            rhs_fixed[3 * n + d[a]] += tau * floc[a];
            load[d[a]] += lloc[a];
            for (int b = 0; b < nb; ++b) {
                for (int c = 0; c < 3; ++c) {
                    entries.emplace_back(3 * d[a] + c, 3 * d[b] + c, kloc(a, b));
                    entries.emplace_back(3 * d[a] + c, 3 * n + d[b], wloc[c](a, b));
                    entries.emplace_back(3 * n + d[a], 3 * d[b] + c, wloc[c](a, b));
                }
                entries.emplace_back(3 * n + d[a], 3 * n + d[b], -tau * alpha * mloc(a, b));
            }
        }
    }

    Eigen::SparseMatrix<double> A(4 * n, 4 * n);
    A.setFromTriplets(entries.begin(), entries.end());
    LuSolver lu(std::move(A));

    DiscreteField Y(space, 3), Hn(space, 1);
    double c = 0;
    for (int iter = 1; iter <= max_iter; ++iter) {
        Eigen::VectorXd rhs = rhs_fixed;
        rhs.tail(n) -= c * load;
        Eigen::VectorXd sol = lu.solve(rhs);
        Y.coeff = sol.head(3 * n);
        Hn.coeff = sol.tail(n);

        double IYH = 0, IH = 0;
        for (int t = 0; t < mesh.n_elements(); ++t)
            for (int q = 0; q < nq; ++q) {
                double w = wsg[size_t(t) * nq + q];
                double h = eval_scalar(Hn, t, tab, q);
                IH += w * h;
                IYH += w * h * eval_vector(Y, t, tab, q).dot(nus[size_t(t) * nq + q]);
            }
        if (std::abs(IH) <= 1e-12 * area / mesh_size(mesh))
            throw ZeroMeanCurvature("integral of H vanished during mesh movement");
        double delta = IYH / IH;
        c += delta;
        if (std::abs(delta) < eps * std::sqrt(area)) {
            CurvedMesh moved = displace(mesh, Y);
            return {std::move(Y), std::move(Hn), std::move(moved), iter};
        }
    }
    throw NoConvergence("mesh movement fixed point did not reach tolerance " + std::to_string(eps) +
                        " within " + std::to_string(max_iter) + " iterations");
}

}  // namespace detail

inline MoveResult mesh_move_step(const EvolutionState& state, const NormalVelocitySpec& spec, double tau,
                                 double eps = 1e-10, int max_iter = 50,
                                 const QuadratureRule& rule_in = QuadratureRule{}) {
    QuadratureRule rule = rule_in.size() ? rule_in : default_rule(state.mesh.order);
    double t = state.t;
    auto& f = spec.forcing;
    return detail::move_step_core(
        state.mesh, spec.alpha, tau, eps, max_iter,
        [&](int, int, const GeometryFrame& fr) { return f ? f(fr.x, t) : 0.0; }, rule);
}

// Replaces each raw inter-frame displacement by an area-corrected,
// regularized one: the raw normal speed (X^n - X~^{n-1}).nu_h drives the
// movement system (alpha = 0, tau = 1) whose correction removes the
// area-violating part.
inline std::vector<CurvedMesh> preprocess_sequence(const std::vector<CurvedMesh>& meshes, double eps = 1e-10,
                                                   int max_iter = 50) {
    if (meshes.empty()) return {};
    for (auto& m : meshes)
        if (m.ref != meshes[0].ref || m.order != meshes[0].order)
            throw ConnectivityMismatch("sequence meshes must share connectivity and order");
    std::vector<CurvedMesh> out;
    out.reserve(meshes.size());
    out.push_back(meshes[0]);
    QuadratureRule rule = default_rule(meshes[0].order);
    for (size_t i = 1; i < meshes.size(); ++i) {
        const CurvedMesh& cur = out.back();
        auto space = build_space(cur, cur.order);
        DiscreteField D(space, 3);
        for (int j = 0; j < cur.n_nodes(); ++j)
            D.set_vec(j, meshes[i].geom_nodes[j] - cur.geom_nodes[j]);
        if (D.coeff.cwiseAbs().maxCoeff() == 0.0) {
            out.push_back(cur);
            continue;
        }
        BasisTable tab(cur.order, rule.points);
        auto res = detail::move_step_core(
            cur, 0.0, 1.0, eps, max_iter,
            [&](int t, int q, const GeometryFrame& fr) { return eval_vector(D, t, tab, q).dot(fr.nu); },
            rule);
        out.push_back(res.mesh_new);
    }
    return out;
}

}  // namespace surfflow
