#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "surfflow/config.hpp"
#include "surfflow/diagnostics.hpp"
#include "surfflow/evolution.hpp"
#include "surfflow/navier_stokes.hpp"
#include "surfflow/vtk.hpp"

namespace surfflow {

struct RunResult {
    std::vector<DiagnosticsRow> rows;
    std::string csv_path;
    std::vector<std::string> vtk_paths;
    FlowState flow;
    DiscreteField H;
    double h0 = 0;
};

struct ConvergenceResult {
    std::vector<int> levels;
    std::vector<double> h;
    std::vector<double> e_div;
    std::vector<double> e_N;
    std::vector<double> eoc_div;
    std::vector<double> eoc_N;
    std::string table_path;
};

namespace detail {

inline NSParams ns_params(const SimConfig& cfg) {
    NSParams prm;
    prm.Re = cfg.Re;
    prm.beta0 = cfg.beta0;
    prm.tau = cfg.tau;
    prm.project_w = cfg.project_w;
    if (cfg.exact_normal)
        prm.penalty_normal = [](const Vec3& x) -> Vec3 { return x.normalized(); };
    return prm;
}

// Componentwise i.i.d. uniform [-0.5, 0.5) nodal noise followed by one
// divergence-cleaning step (V = 0) so the start state is admissible.
inline FlowState initial_flow(const SimConfig& cfg, const CurvedMesh& mesh, const NSParams& prm,
                              const QuadratureRule& rule) {
    auto vel = build_space(mesh, cfg.order);
    FlowState flow{DiscreteField(vel, 3), DiscreteField(build_space(mesh, cfg.order - 1), 1),
                   mesh, 0.0};
    if (cfg.u0 == "random") {
        std::mt19937_64 rng(cfg.seed);
        for (Eigen::Index i = 0; i < flow.u.coeff.size(); ++i)
            flow.u.coeff[i] = double(rng() >> 11) * 0x1.0p-53 - 0.5;
        NSParams clean = prm;
        clean.tau = std::min(cfg.tau, 1e-3);
        clean.forcing = nullptr;
        flow = ns_step(flow, mesh, DiscreteField(vel, 3), DiscreteField(vel, 1), clean, rule);
        flow.t = 0;
    }
    return flow;
}

inline std::vector<std::pair<std::string, DiscreteField>> snapshot_fields(const FlowState& flow,
                                                                          const DiscreteField& H) {
    auto vel = flow.u.space;
    DiscreteField nu = nodal_normals(vel);
    DiscreteField Pu(vel, 3), mag_Pu(vel, 1), u_dot_nu(vel, 1);
    for (int i = 0; i < vel->dof_count; ++i) {
        Vec3 u = flow.u.vec(i);
        Vec3 nv = nu.vec(i);
        Vec3 pu = u - u.dot(nv) * nv;
        Pu.set_vec(i, pu);
        mag_Pu.at(i) = pu.norm();
        u_dot_nu.at(i) = u.dot(nv);
    }
    return {{"u", flow.u},        {"Pu", Pu}, {"mag_Pu", mag_Pu}, {"u_dot_nu", u_dot_nu},
            {"p", flow.p},        {"H", H},   {"nu", nu}};
}

struct RunOutputs {
    const SimConfig& cfg;
    RunResult& out;
    std::ofstream csv;
    bool want_csv = false;
    bool want_vtk = false;

    RunOutputs(const SimConfig& cfg_, RunResult& out_) : cfg(cfg_), out(out_) {
        want_csv = format_enabled(cfg, "csv");
        want_vtk = format_enabled(cfg, "vtk");
        std::filesystem::create_directories(cfg.output_dir);
        for (const auto& entry : std::filesystem::directory_iterator(cfg.output_dir)) {
            if (!entry.is_regular_file()) continue;
            const std::string name = entry.path().filename().string();
            if (name.rfind("fields_", 0) == 0 && surfflow::detail::ends_with_nocase(name, ".vtk"))
                std::filesystem::remove(entry.path());
        }
        if (want_csv) {
            out.csv_path = cfg.output_dir + "/diagnostics.csv";
            csv.open(out.csv_path, std::ios::binary);
            if (!csv) throw IoError("cannot open " + out.csv_path);
            csv << csv_header() << '\n';
            csv.flush();
        }
    }

    void row(const DiagnosticsRow& r) {
        out.rows.push_back(r);
        if (want_csv) {
            append_csv_row(csv, r);
            csv.flush();
            if (!csv) throw IoError("write failed for " + out.csv_path);
        }
    }

    void snapshot(long long n, const FlowState& flow, const DiscreteField& H) {
        if (!want_vtk) return;
        char name[32];
        std::snprintf(name, sizeof(name), "fields_%06lld.vtk", n);
        std::string path = cfg.output_dir + "/" + name;
        write_vtk(flow.mesh, snapshot_fields(flow, H), path);
        out.vtk_paths.push_back(path);
    }
};

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline DiagnosticsRow measure_row(long long n, double t, const FlowState& flow,
                                  const DiscreteField& V, int iters, double wall_ms,
                                  const QuadratureRule& rule) {
    DiagnosticsRow r;
    r.n = n;
    r.t = t;
    r.E_kin = kinetic_energy(flow.u, rule);
    r.area = surface_area(flow.mesh);
    r.div_error = div_error(flow.u, rule);
    r.normal_error = normal_error(flow.u, V, rule);
    r.fp_iterations = iters;
    r.wall_time_ms = wall_ms;
    return r;
}

}  // namespace detail

// Evolving-sphere experiment: each step moves the mesh under
// V0(H) = alpha H + f with the area-conserving correction, then advances the
// flow with the penalty target V^{n+1} = (Y.nu_h)/tau on the moved surface
// (or the prescribed analytic speed when analytic_V is set).
inline RunResult run_perturbed_sphere(const SimConfig& cfg) {
    validate_config(cfg);
    QuadratureRule rule = config_rule(cfg);
    CurvedMesh mesh = load_geometry(cfg);

    NormalVelocitySpec vspec;
    vspec.alpha = cfg.alpha;
    if (cfg.forcing == "perturbed")
        vspec.forcing = [](const Vec3& x, double t) {
            return std::sin(M_PI * t) * x[0] * x[0] + std::sin(2 * M_PI * t) * x[1] * x[1];
        };

    NSParams prm = detail::ns_params(cfg);
    FlowState flow = detail::initial_flow(cfg, mesh, prm, rule);
    EvolutionState est{mesh, init_curvature(mesh, cfg.order, rule), 0.0};

    RunResult out;
    out.h0 = mesh_size(mesh);
    detail::RunOutputs io(cfg, out);

    io.row(detail::measure_row(0, 0.0, flow, DiscreteField(flow.u.space, 1), 0, 0.0, rule));
    io.snapshot(0, flow, est.H);

    long long N = std::llround(cfg.t_end / cfg.tau);
    if (N < 1) N = 1;
    for (long long n = 1; n <= N; ++n) {
        auto t0 = std::chrono::steady_clock::now();
        MoveResult mv = mesh_move_step(est, vspec, cfg.tau, cfg.epsilon, 50, rule);

        auto nvel = build_space(mv.mesh_new, cfg.order);
        DiscreteField V(nvel, 1);
        if (cfg.analytic_V) {
            auto pos = nvel->node_positions();
            for (int i = 0; i < nvel->dof_count; ++i)
                V.at(i) = cfg.alpha * mv.H_new.at(i) +
                          (vspec.forcing ? vspec.forcing(pos[i], est.t) : 0.0);
        } else {
            DiscreteField nu = nodal_normals(nvel);
            for (int i = 0; i < nvel->dof_count; ++i)
                V.at(i) = mv.Y.vec(i).dot(nu.vec(i)) / cfg.tau;
        }

        flow = ns_step(flow, mv.mesh_new, mv.Y, V, prm, rule);
        flow.t = double(n) * cfg.tau;
        DiscreteField H = lift_field(mv.H_new, mv.mesh_new);
        est = EvolutionState{mv.mesh_new, H, flow.t};

        double wall = cfg.timing ? detail::elapsed_ms(t0) : 0.0;
        io.row(detail::measure_row(n, flow.t, flow, V, mv.iterations, wall, rule));
        if (n % cfg.cadence == 0 || n == N) io.snapshot(n, flow, H);
    }

    out.flow = std::move(flow);
    out.H = std::move(est.H);
    return out;
}

// Refinement study of the constraint residuals e_div = max_n div_error and
// e_N = max_n normal_error over a fixed-horizon evolving-sphere run.
inline ConvergenceResult run_convergence(const SimConfig& cfg, const std::vector<int>& levels) {
    validate_config(cfg);
    if (levels.size() < 3) throw ConfigError("convergence study needs at least 3 refinement levels");
    for (std::size_t i = 0; i < levels.size(); ++i)
        for (std::size_t j = i + 1; j < levels.size(); ++j)
            if (levels[i] == levels[j])
                throw DegenerateLevels("refinement level " + std::to_string(levels[i]) + " repeated");

    ConvergenceResult out;
    out.levels = levels;
    for (int lvl : levels) {
        SimConfig c = cfg;
        c.geometry = "icosphere:" + std::to_string(lvl);
        c.output_dir = cfg.output_dir + "/level" + std::to_string(lvl);
        RunResult rr = run_perturbed_sphere(c);
        double ed = 0, en = 0;
        for (std::size_t r = 1; r < rr.rows.size(); ++r) {
            ed = std::max(ed, rr.rows[r].div_error);
            en = std::max(en, rr.rows[r].normal_error);
        }
        out.h.push_back(rr.h0);
        out.e_div.push_back(ed);
        out.e_N.push_back(en);
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.eoc_div.assign(levels.size(), nan);
    out.eoc_N.assign(levels.size(), nan);
    for (std::size_t i = 1; i < levels.size(); ++i) {
        double hr = out.h[i - 1] / out.h[i];
        if (!(hr > 0) || hr == 1)
            throw DegenerateLevels("mesh sizes do not separate the levels");
        out.eoc_div[i] = std::log(out.e_div[i - 1] / out.e_div[i]) / std::log(hr);
        out.eoc_N[i] = std::log(out.e_N[i - 1] / out.e_N[i]) / std::log(hr);
    }

    std::filesystem::create_directories(cfg.output_dir);
    out.table_path = cfg.output_dir + "/convergence.csv";
    std::ofstream os(out.table_path, std::ios::binary);
    if (!os) throw IoError("cannot open " + out.table_path);
    os << "level,h,e_div,e_N,eoc_div,eoc_N\n";
    for (std::size_t i = 0; i < levels.size(); ++i) {
        using detail::fmt_double;
        os << levels[i] << ',' << fmt_double(out.h[i]) << ',' << fmt_double(out.e_div[i]) << ','
           << fmt_double(out.e_N[i]) << ',' << fmt_double(out.eoc_div[i]) << ','
           << fmt_double(out.eoc_N[i]) << '\n';
    }
    os.flush();
    if (!os) throw IoError("write failed for " + out.table_path);
    return out;
}

// Flow on a prescribed mesh sequence: frames are area-corrected by
// preprocessing, then each transition drives one flow step with
// V^n = (X^n - X^{n-1}).nu_h / tau.
inline RunResult run_sequence(const SimConfig& cfg) {
    validate_config(cfg);
    if (cfg.sequence_dir.empty()) throw ConfigError("sequence_dir is not set");
    if (!std::filesystem::is_directory(cfg.sequence_dir))
        throw ConfigError("sequence_dir is not a directory: " + cfg.sequence_dir);

    std::vector<std::string> paths;
    for (const auto& e : std::filesystem::directory_iterator(cfg.sequence_dir)) {
        if (!e.is_regular_file()) continue;
        std::string p = e.path().string();
        if (detail::ends_with_nocase(p, ".off") || detail::ends_with_nocase(p, ".obj"))
            paths.push_back(p);
    }
    std::sort(paths.begin(), paths.end());
    if (paths.size() < 2)
        throw ConfigError("sequence needs at least two mesh frames in " + cfg.sequence_dir);

    QuadratureRule rule = config_rule(cfg);
    std::vector<CurvedMesh> frames = preprocess_sequence(load_mesh_sequence(paths, cfg.order),
                                                         cfg.epsilon);

    NSParams prm = detail::ns_params(cfg);
    FlowState flow = detail::initial_flow(cfg, frames[0], prm, rule);

    RunResult out;
    out.h0 = mesh_size(frames[0]);
    detail::RunOutputs io(cfg, out);

    io.row(detail::measure_row(0, 0.0, flow, DiscreteField(flow.u.space, 1), 0, 0.0, rule));
    if (io.want_vtk) io.snapshot(0, flow, init_curvature(frames[0], cfg.order, rule));

    const long long N = static_cast<long long>(frames.size()) - 1;
    for (long long n = 1; n <= N; ++n) {
        auto t0 = std::chrono::steady_clock::now();
        auto nvel = build_space(frames[n], cfg.order);
        DiscreteField Y(nvel, 3);
        for (int i = 0; i < nvel->dof_count; ++i)
            Y.set_vec(i, frames[n].geom_nodes[i] - frames[n - 1].geom_nodes[i]);
        DiscreteField nu = nodal_normals(nvel);
        DiscreteField V(nvel, 1);
        for (int i = 0; i < nvel->dof_count; ++i)
            V.at(i) = Y.vec(i).dot(nu.vec(i)) / cfg.tau;

        flow = ns_step(flow, frames[n], Y, V, prm, rule);
        flow.t = double(n) * cfg.tau;

        double wall = cfg.timing ? detail::elapsed_ms(t0) : 0.0;
        io.row(detail::measure_row(n, flow.t, flow, V, 0, wall, rule));
        if (io.want_vtk && (n % cfg.cadence == 0 || n == N))
            io.snapshot(n, flow, init_curvature(frames[n], cfg.order, rule));
    }

    out.flow = std::move(flow);
    out.H = init_curvature(out.flow.mesh, cfg.order, rule);
    return out;
}

}  // namespace surfflow
