#pragma once

#include <cmath>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "surfflow/diagnostics.hpp"
#include "surfflow/fields.hpp"

namespace surfflow {

// Legacy ASCII unstructured-grid export. Each curved element is subdivided
// into the k^2 linear sub-triangles of its degree-k Lagrange lattice, so the
// points are exactly the geometry nodes and every field is sampled at them.
inline void write_vtk(const CurvedMesh& mesh,
                      const std::vector<std::pair<std::string, DiscreteField>>& fields,
                      const std::string& path) {
    for (const auto& [name, f] : fields) {
        if (f.space->mesh.ref != mesh.ref)
            throw ConnectivityMismatch("field '" + name + "' lives on a different mesh");
        if (f.components != 1 && f.components != 3)
            throw DimensionMismatch("field '" + name + "' must have 1 or 3 components");
    }

    const int k = mesh.order;
    auto space = build_space(mesh, k);
    auto ref_pts = space->local_ref_points();

    auto lidx = [k](int i, int j) { return j * (k + 1) - j * (j - 1) / 2 + i; };
    std::vector<int> lattice_local((k + 1) * (k + 2) / 2, -1);
    for (int a = 0; a < space->nb; ++a) {
        int i = int(std::lround(ref_pts[a][0] * k));
        int j = int(std::lround(ref_pts[a][1] * k));
        lattice_local[lidx(i, j)] = a;
    }

    const int np = space->dof_count;
    const int nc = mesh.n_elements() * k * k;

    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path);
    auto d = [](double v) { return detail::fmt_double(v); };

    os << "# vtk DataFile Version 3.0\nsurface fields\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << np << " double\n";
    for (int i = 0; i < np; ++i) {
        const Vec3& x = mesh.geom_nodes[i];
        os << d(x[0]) << ' ' << d(x[1]) << ' ' << d(x[2]) << '\n';
    }

    os << "CELLS " << nc << ' ' << 4 * nc << '\n';
    for (int t = 0; t < mesh.n_elements(); ++t) {
        const int* gd = space->dofs(t);
        auto cell = [&](int a, int b, int c) {
            os << "3 " << gd[lattice_local[a]] << ' ' << gd[lattice_local[b]] << ' '
               << gd[lattice_local[c]] << '\n';
        };
        for (int j = 0; j < k; ++j)
            for (int i = 0; i + j < k; ++i) {
                cell(lidx(i, j), lidx(i + 1, j), lidx(i, j + 1));
                if (i + j < k - 1) cell(lidx(i + 1, j), lidx(i + 1, j + 1), lidx(i, j + 1));
            }
    }

    os << "CELL_TYPES " << nc << '\n';
    for (int c = 0; c < nc; ++c) os << "5\n";

    if (!fields.empty()) {
        os << "POINT_DATA " << np << '\n';
        std::vector<double> vals;
        for (const auto& [name, f] : fields) {
            BasisTable tab(f.space->order, ref_pts);
            vals.assign(std::size_t(f.components) * np, 0.0);
            for (int t = 0; t < mesh.n_elements(); ++t) {
                const int* gd = space->dofs(t);
                for (int a = 0; a < space->nb; ++a) {
                    if (f.components == 1) {
                        vals[gd[a]] = eval_scalar(f, t, tab, a);
                    } else {
                        Vec3 v = eval_vector(f, t, tab, a);
                        for (int c = 0; c < 3; ++c) vals[3 * gd[a] + c] = v[c];
                    }
                }
            }
            if (f.components == 1) {
                os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
                for (int i = 0; i < np; ++i) os << d(vals[i]) << '\n';
            } else {
                os << "VECTORS " << name << " double\n";
                for (int i = 0; i < np; ++i)
                    os << d(vals[3 * i]) << ' ' << d(vals[3 * i + 1]) << ' ' << d(vals[3 * i + 2])
                       << '\n';
            }
        }
    }

    os.flush();
    if (!os) throw IoError("write failed for " + path);
}

}  // namespace surfflow
