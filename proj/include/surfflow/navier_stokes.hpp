#pragma once

#include <functional>

#include "surfflow/assembly.hpp"

namespace surfflow {

struct FlowState {
    DiscreteField u;
    DiscreteField p;
    CurvedMesh mesh;
    double t = 0;
};

struct NSParams {
    double Re = 1;
    double beta0 = 100;
    double tau = 1e-3;
    std::function<Vec3(const Vec3&, double)> forcing;
    bool project_w = false;
    std::function<Vec3(const Vec3&)> penalty_normal;
};

// Transport along the common reference chart: same coefficients, reinterpreted
// over the new geometry.
inline DiscreteField lift_field(const DiscreteField& u_old, const CurvedMesh& mesh_new) {
    const CurvedMesh& old_mesh = u_old.space->mesh;
    if (old_mesh.ref != mesh_new.ref)
        throw ConnectivityMismatch("lift requires meshes sharing the reference triangulation");
    DiscreteField out(build_space(mesh_new, u_old.space->order), u_old.components);
    out.coeff = u_old.coeff;
    return out;
}

inline double kinetic_energy(const DiscreteField& u, const QuadratureRule& rule) {
    double n = l2_norm(u, rule);
    return n * n;
}

inline double div_error(const DiscreteField& u, const QuadratureRule& rule) {
    const CurvedMesh& mesh = u.space->mesh;
    BasisTable geom_tab(mesh.order, rule.points);
    BasisTable tab(u.space->order, rule.points);
    double acc = 0;
    for (int t = 0; t < mesh.n_elements(); ++t)
        for (int q = 0; q < rule.size(); ++q) {
            GeometryFrame fr = frame_from_table(mesh, t, geom_tab, q);
            Mat3 G = grad_C_vector(fr, ref_grad_vector(u, t, tab, q));
            double d = (fr.P * G).trace();
            acc += rule.weights[q] * fr.sqrt_det_g * d * d;
        }
    return std::sqrt(acc);
}

inline double normal_error(const DiscreteField& u, const DiscreteField& V, const QuadratureRule& rule) {
    const CurvedMesh& mesh = u.space->mesh;
    BasisTable geom_tab(mesh.order, rule.points);
    BasisTable tabU(u.space->order, rule.points);
    BasisTable tabV(V.space->order, rule.points);
    double acc = 0;
    for (int t = 0; t < mesh.n_elements(); ++t)
        for (int q = 0; q < rule.size(); ++q) {
            GeometryFrame fr = frame_from_table(mesh, t, geom_tab, q);
            double d = eval_vector(u, t, tabU, q).dot(fr.nu) - eval_scalar(V, t, tabV, q);
            acc += rule.weights[q] * fr.sqrt_det_g * d * d;
        }
    return std::sqrt(acc);
}

// One semi-implicit step of the penalized surface Navier-Stokes system on the
// already-moved surface. Unknowns [u (3m), p (q), lambda]; for tests v, q:
//   (u,v) + tau*((Grad_C u)w, v) + (2tau/Re)(sigma(u), Grad_P v)
//         - tau*(p, div_P v) + beta*tau*(u.nu)(v.nu)
//       = (uhat,v) + tau*(b,v) + beta*tau*(V,v.nu),
//   (div_P u, q) + lambda*(1,q) = 0,    (p,1) = 0,
// with w = uhat - Y/tau, beta = beta0/h^2, sigma = sym(Grad_P u). The penalty
// is assembled positive semidefinite on the unknown side.
inline FlowState ns_step(const FlowState& state, const CurvedMesh& mesh_new, const DiscreteField& Y,
                         const DiscreteField& V_new, const NSParams& params,
                         const QuadratureRule& rule_in = QuadratureRule{}) {
    const int k = state.u.space->order;
    if (k < 2) throw ConfigError("velocity order must be at least 2 for the Taylor-Hood pair");
    if (!(params.tau > 0) || !(params.Re > 0) || !(params.beta0 > 0))
        throw ConfigError("tau, Re and beta0 must be positive");
    if (state.mesh.ref != mesh_new.ref || state.mesh.order != mesh_new.order)
        throw ConnectivityMismatch("ns_step meshes must share connectivity and order");
    if (Y.components != 3 || Y.space->order != k || Y.space->dof_count != mesh_new.n_nodes())
        throw DimensionMismatch("displacement field does not match the mesh");
    if (V_new.components != 1 || V_new.space->order != k)
        throw DimensionMismatch("prescribed normal speed must be a scalar field of the velocity order");

    QuadratureRule rule = rule_in.size() ? rule_in : default_rule(mesh_new.order);
    auto vel = build_space(mesh_new, k);
    auto pre = build_space(mesh_new, k - 1);
    const int m = vel->dof_count, nq = pre->dof_count;
    const int nbU = vel->nb, nbP = pre->nb;
    const int N = 3 * m + nq + 1;
    const double tau = params.tau;
    const double h = mesh_size(mesh_new);
    const double beta = params.beta0 / (h * h);

    DiscreteField uhat = lift_field(state.u, mesh_new);

    BasisTable geom_tab(mesh_new.order, rule.points);
    BasisTable tabU(k, rule.points);
    BasisTable tabP(k - 1, rule.points);

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(size_t(mesh_new.n_elements()) * (9 * nbU * nbU + 6 * nbU * nbP + 2 * nbP));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);

    Eigen::MatrixXd auu(3 * nbU, 3 * nbU), aup(3 * nbU, nbP), dpu(nbP, 3 * nbU);
    Eigen::VectorXd floc(3 * nbU), mloc(nbP);
    std::vector<Vec3> g(nbU);

    for (int t = 0; t < mesh_new.n_elements(); ++t) {
        auu.setZero();
        aup.setZero();
        dpu.setZero();
        floc.setZero();
        mloc.setZero();
        for (int q = 0; q < rule.size(); ++q) {
            GeometryFrame fr = frame_from_table(mesh_new, t, geom_tab, q);
            double w = rule.weights[q] * fr.sqrt_det_g;
            Vec3 nu = params.penalty_normal ? params.penalty_normal(fr.x) : fr.nu;
            Vec3 uh = eval_vector(uhat, t, tabU, q);
            Vec3 wvel = uh - eval_vector(Y, t, tabU, q) / tau;
            if (params.project_w) wvel = fr.P * wvel;
            double V = eval_scalar(V_new, t, tabU, q);
            Vec3 b = params.forcing ? params.forcing(fr.x, state.t + tau) : Vec3(Vec3::Zero());
            for (int a = 0; a < nbU; ++a)
                g[a] = grad_C_scalar(fr, Vec2(tabU.dxi(q, a), tabU.deta(q, a)));

            for (int a = 0; a < nbU; ++a) {
                double va = tabU.value(q, a);
                for (int ap = 0; ap < nbU; ++ap) {
                    double vap = tabU.value(q, ap);
                    double mass_conv = w * (va * vap + tau * va * g[ap].dot(wvel));
                    double gg = w * (tau / params.Re) * g[a].dot(g[ap]);
                    double pen = w * beta * tau * va * vap;
                    for (int c = 0; c < 3; ++c) {
                        for (int cp = 0; cp < 3; ++cp) {
                            double val = gg * fr.P(c, cp) +
                                         w * (tau / params.Re) * g[a][cp] * g[ap][c] +
                                         pen * nu[c] * nu[cp];
                            if (c == cp) val += mass_conv;
                            auu(3 * a + c, 3 * ap + cp) += val;
                        }
                    }
                }
                for (int bq = 0; bq < nbP; ++bq) {
                    double psi = tabP.value(q, bq);
                    for (int c = 0; c < 3; ++c) {
                        aup(3 * a + c, bq) -= w * tau * psi * g[a][c];
                        dpu(bq, 3 * a + c) += w * psi * g[a][c];
                    }
                }
                for (int c = 0; c < 3; ++c)
                    floc[3 * a + c] += w * va * (uh[c] + tau * b[c] + beta * tau * V * nu[c]);
            }
            for (int bq = 0; bq < nbP; ++bq) mloc[bq] += w * tabP.value(q, bq);
        }
        const int* du = vel->dofs(t);
        const int* dp = pre->dofs(t);
        for (int a = 0; a < nbU; ++a) {
            for (int c = 0; c < 3; ++c) {
                int row = 3 * du[a] + c;
                rhs[row] += floc[3 * a + c];
                for (int ap = 0; ap < nbU; ++ap)
                    for (int cp = 0; cp < 3; ++cp)
                        entries.emplace_back(row, 3 * du[ap] + cp, auu(3 * a + c, 3 * ap + cp));
                for (int bq = 0; bq < nbP; ++bq)
                    entries.emplace_back(row, 3 * m + dp[bq], aup(3 * a + c, bq));
            }
        }
        for (int bq = 0; bq < nbP; ++bq) {
            int row = 3 * m + dp[bq];
            for (int ap = 0; ap < nbU; ++ap)
                for (int cp = 0; cp < 3; ++cp)
                    entries.emplace_back(row, 3 * du[ap] + cp, dpu(bq, 3 * ap + cp));
            entries.emplace_back(row, N - 1, mloc[bq]);
            entries.emplace_back(N - 1, 3 * m + dp[bq], mloc[bq]);
        }
    }

    Eigen::SparseMatrix<double> A(N, N);
    A.setFromTriplets(entries.begin(), entries.end());
    Eigen::VectorXd sol = solve_direct(A, rhs);

    FlowState next{DiscreteField(vel, 3), DiscreteField(pre, 1), mesh_new, state.t + tau};
    next.u.coeff = sol.head(3 * m);
    next.p.coeff = sol.segment(3 * m, nq);
    return next;
}

}  // namespace surfflow
