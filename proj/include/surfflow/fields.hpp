#pragma once

#include <memory>
#include <type_traits>
#include <vector>

#include "surfflow/geometry.hpp"

namespace surfflow {

// Continuous Lagrange space of one order on a curved mesh. The space order is
// independent of the geometry order (pressure uses order k-1 on order-k maps).
struct ScalarSpace {
    CurvedMesh mesh;
    std::shared_ptr<const NodeLayout> layout;
    int order = 1;
    int dof_count = 0;
    int nb = 0;

    const int* dofs(int t) const { return layout->dofs(t); }

    // Reference lattice points of the local dof nodes.
    std::vector<Vec2> local_ref_points() const {
        std::vector<Vec2> pts;
        pts.reserve(layout->local.size());
        for (auto& b : layout->local) pts.push_back(node_ref_point(order, b));
        return pts;
    }

    // World position of every dof node under the curved element map.
    std::vector<Vec3> node_positions() const {
        std::vector<Vec3> pos(dof_count);
        std::vector<char> seen(dof_count, 0);
        BasisTable geom_tab(mesh.order, local_ref_points());
        const int geom_nb = mesh.layout->nb;
        for (int t = 0; t < mesh.n_elements(); ++t) {
            const int* gd = mesh.element_dofs(t);
            const int* sd = dofs(t);
            for (int j = 0; j < nb; ++j) {
                if (seen[sd[j]]) continue;
                Vec3 x = Vec3::Zero();
                for (int a = 0; a < geom_nb; ++a) x += geom_tab.value(j, a) * mesh.geom_nodes[gd[a]];
                pos[sd[j]] = x;
                seen[sd[j]] = 1;
            }
        }
        return pos;
    }
};

inline std::shared_ptr<const ScalarSpace> build_space(const CurvedMesh& mesh, int order) {
    auto s = std::make_shared<ScalarSpace>();
    s->mesh = mesh;
    s->layout = order == mesh.order ? mesh.layout : std::make_shared<NodeLayout>(mesh.ref, order);
    s->order = order;
    s->dof_count = s->layout->count;
    s->nb = s->layout->nb;
    return s;
}

// Coefficient vector over a scalar (components = 1) or 3-vector
// (components = 3) Lagrange space; vector components interleaved per node.
struct DiscreteField {
    std::shared_ptr<const ScalarSpace> space;
    int components = 1;
    Eigen::VectorXd coeff;

    DiscreteField() = default;
    DiscreteField(std::shared_ptr<const ScalarSpace> space_, int components_)
        : space(std::move(space_)), components(components_) {
        coeff = Eigen::VectorXd::Zero(Eigen::Index(components) * space->dof_count);
    }

    double& at(int node, int c = 0) { return coeff[Eigen::Index(components) * node + c]; }
    double at(int node, int c = 0) const { return coeff[Eigen::Index(components) * node + c]; }
    Vec3 vec(int node) const { return Vec3(at(node, 0), at(node, 1), at(node, 2)); }
    void set_vec(int node, const Vec3& v) {
        for (int c = 0; c < 3; ++c) at(node, c) = v[c];
    }
};

// Nodal interpolation of a function of position. The callable returns a
// double for scalar fields or a Vec3 for vector fields.
template <class F>
DiscreteField interpolate(std::shared_ptr<const ScalarSpace> space, int components, F&& f) {
    DiscreteField out(space, components);
    auto pos = space->node_positions();
    for (int i = 0; i < space->dof_count; ++i) {
        if constexpr (std::is_convertible_v<std::invoke_result_t<F, Vec3>, double>) {
            if (components != 1) throw DimensionMismatch("scalar function interpolated into vector field");
            out.at(i) = f(pos[i]);
        } else {
            if (components != 3) throw DimensionMismatch("vector function interpolated into scalar field");
            out.set_vec(i, f(pos[i]));
        }
    }
    return out;
}

// Pointwise evaluation from a basis table row.
inline double eval_scalar(const DiscreteField& f, int t, const BasisTable& tab, int q) {
    const int* d = f.space->dofs(t);
    double v = 0;
    for (int a = 0; a < f.space->nb; ++a) v += tab.value(q, a) * f.at(d[a]);
    return v;
}

inline Vec3 eval_vector(const DiscreteField& f, int t, const BasisTable& tab, int q) {
    const int* d = f.space->dofs(t);
    Vec3 v = Vec3::Zero();
    for (int a = 0; a < f.space->nb; ++a) v += tab.value(q, a) * f.vec(d[a]);
    return v;
}

// Reference-chart gradient: scalar -> Vec2; vector -> 3x2 (rows world
// components, columns d/dxi, d/deta).
inline Vec2 ref_grad_scalar(const DiscreteField& f, int t, const BasisTable& tab, int q) {
    const int* d = f.space->dofs(t);
    Vec2 g = Vec2::Zero();
    for (int a = 0; a < f.space->nb; ++a) {
        double c = f.at(d[a]);
        g[0] += tab.dxi(q, a) * c;
        g[1] += tab.deta(q, a) * c;
    }
    return g;
}

inline Mat32 ref_grad_vector(const DiscreteField& f, int t, const BasisTable& tab, int q) {
    const int* d = f.space->dofs(t);
    Mat32 g = Mat32::Zero();
    for (int a = 0; a < f.space->nb; ++a) {
        Vec3 c = f.vec(d[a]);
        g.col(0) += tab.dxi(q, a) * c;
        g.col(1) += tab.deta(q, a) * c;
    }
    return g;
}

// Componentwise surface gradient Grad_C (right projection is built into the
// pseudo-inverse push-forward) and tangential gradient Grad_P.
inline Vec3 grad_C_scalar(const GeometryFrame& fr, const Vec2& ref_grad) {
    return fr.Jpinv.transpose() * ref_grad;
}

inline Mat3 grad_C_vector(const GeometryFrame& fr, const Mat32& ref_grad) {
    return ref_grad * fr.Jpinv;
}

struct FieldEvaluator {
    const DiscreteField* field;
    BasisTable tab;

    FieldEvaluator(const DiscreteField& f, const std::vector<Vec2>& pts)
        : field(&f), tab(f.space->order, pts) {}
};

// Point-evaluation forms of the surface operators (build the basis row on the
// fly; assembly uses the tabulated forms above).
inline Vec3 eval_grad_C(const DiscreteField& f, const GeometryFrame& fr, int t, const Vec2& ref_pt) {
    if (f.components != 1) throw DimensionMismatch("eval_grad_C scalar form needs a scalar field");
    BasisTable tab(f.space->order, {ref_pt});
    return grad_C_scalar(fr, ref_grad_scalar(f, t, tab, 0));
}

inline Mat3 eval_grad_C3(const DiscreteField& f, const GeometryFrame& fr, int t, const Vec2& ref_pt) {
    if (f.components != 3) throw DimensionMismatch("eval_grad_C3 needs a vector field");
    BasisTable tab(f.space->order, {ref_pt});
    return grad_C_vector(fr, ref_grad_vector(f, t, tab, 0));
}

inline Mat3 eval_grad_P(const DiscreteField& f, const GeometryFrame& fr, int t, const Vec2& ref_pt) {
    return fr.P * eval_grad_C3(f, fr, t, ref_pt);
}

inline double eval_div_P(const DiscreteField& f, const GeometryFrame& fr, int t, const Vec2& ref_pt) {
    return eval_grad_P(f, fr, t, ref_pt).trace();
}

inline double eval_div_C(const DiscreteField& f, const GeometryFrame& fr, int t, const Vec2& ref_pt) {
    return eval_grad_C3(f, fr, t, ref_pt).trace();
}

// Row-wise componentwise divergence of a tensor field given by its rows.
inline Vec3 eval_div_C_rows(const std::array<DiscreteField, 3>& rows, const GeometryFrame& fr, int t,
                            const Vec2& ref_pt) {
    return Vec3(eval_div_C(rows[0], fr, t, ref_pt), eval_div_C(rows[1], fr, t, ref_pt),
                eval_div_C(rows[2], fr, t, ref_pt));
}

inline double l2_norm(const DiscreteField& f, const QuadratureRule& rule) {
    const auto& mesh = f.space->mesh;
    BasisTable geom_tab(mesh.order, rule.points);
    BasisTable tab(f.space->order, rule.points);
    double acc = 0;
    for (int t = 0; t < mesh.n_elements(); ++t)
        for (int q = 0; q < rule.size(); ++q) {
            GeometryFrame fr = frame_from_table(mesh, t, geom_tab, q);
            double s2 = f.components == 1 ? std::pow(eval_scalar(f, t, tab, q), 2)
                                          : eval_vector(f, t, tab, q).squaredNorm();
            acc += rule.weights[q] * fr.sqrt_det_g * s2;
        }
    return std::sqrt(acc);
}

inline double l2_norm(const DiscreteField& f) { return l2_norm(f, default_rule(f.space->mesh.order)); }

// Running max accumulator for L-infinity-in-time norms.
inline double linf_track(double accumulator, double value) {
    return std::max(accumulator, std::abs(value));
}

// Displacement by a vector field living on the geometry layout.
inline CurvedMesh displace(const CurvedMesh& mesh, const DiscreteField& Y) {
    if (Y.components != 3) throw DimensionMismatch("displacement field must have 3 components");
    if (Y.space->order != mesh.order || Y.space->dof_count != mesh.n_nodes())
        throw DimensionMismatch("displacement space does not match mesh layout");
    std::vector<Vec3> delta(mesh.n_nodes());
    for (int i = 0; i < mesh.n_nodes(); ++i) delta[i] = Y.vec(i);
    return displace(mesh, delta);
}

}  // namespace surfflow
