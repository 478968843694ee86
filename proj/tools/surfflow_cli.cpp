#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "surfflow/drivers.hpp"

using namespace surfflow;

namespace {

struct ConfigArgs {
    std::string config_file;
    std::vector<std::pair<std::string, std::string>> overrides;
};

void add_config_flags(CLI::App* cmd, ConfigArgs& args) {
    cmd->add_option("--config", args.config_file, "config file with key = value lines");
    static const char* keys[] = {"geometry",   "sequence_dir", "order",      "tau",
                                 "t_end",      "Re",           "beta0",      "alpha",
                                 "epsilon",    "quad_degree",  "seed",       "u0",
                                 "forcing",    "output_dir",   "cadence",    "formats",
                                 "project_w",  "exact_normal", "analytic_V", "timing"};
    for (const char* key : keys)
        cmd->add_option_function<std::string>(
            std::string("--") + key,
            [&args, key](const std::string& v) { args.overrides.emplace_back(key, v); });
}

SimConfig build_config(const ConfigArgs& args) {
    SimConfig cfg = args.config_file.empty() ? SimConfig{} : load_config(args.config_file);
    for (const auto& [k, v] : args.overrides) set_key(cfg, k, v);
    validate_config(cfg);
    return cfg;
}

std::vector<int> parse_levels(const std::string& spec) {
    std::vector<int> levels;
    for (const auto& tok : detail::split(spec, ',')) {
        std::string t = detail::trim(tok);
        if (t.empty()) continue;
        levels.push_back(int(detail::parse_cfg_int("levels", t)));
    }
    return levels;
}

void print_run_summary(const RunResult& rr) {
    const DiagnosticsRow& last = rr.rows.back();
    std::printf("steps: %lld  t: %s  E_kin: %s  area: %s\n", last.n,
                detail::fmt_double(last.t).c_str(), detail::fmt_double(last.E_kin).c_str(),
                detail::fmt_double(last.area).c_str());
    double drift = 0, ediv = 0, en = 0;
    for (const auto& r : rr.rows) {
        drift = std::max(drift, std::abs(r.area - rr.rows[0].area) / rr.rows[0].area);
        if (r.n > 0) {
            ediv = std::max(ediv, r.div_error);
            en = std::max(en, r.normal_error);
        }
    }
    std::printf("max area drift: %s  e_div: %s  e_N: %s\n", detail::fmt_double(drift).c_str(),
                detail::fmt_double(ediv).c_str(), detail::fmt_double(en).c_str());
    if (!rr.csv_path.empty()) std::printf("wrote %s\n", rr.csv_path.c_str());
    if (!rr.vtk_paths.empty())
        std::printf("wrote %zu VTK snapshots under %s\n", rr.vtk_paths.size(),
                    std::filesystem::path(rr.vtk_paths.back()).parent_path().string().c_str());
}

int run_check() {
    int failed = 0;
    auto report = [&](const char* name, bool ok, double value, double bound) {
        std::printf("%s: %s (value %.3e, bound %.3e)\n", ok ? "ok" : "FAIL", name, value, bound);
        if (!ok) ++failed;
    };

    {
        double worst = 0;
        for (int deg = 1; deg <= 12; ++deg) {
            QuadratureRule rule = quadrature_rule(deg);
            double s = 0;
            for (int q = 0; q < rule.size(); ++q) s += rule.weights[q];
            worst = std::max(worst, std::abs(s - 0.5));
        }
        report("quadrature weights sum to reference area", worst <= 1e-14, worst, 1e-14);
    }
    {
        CurvedMesh mesh = make_icosphere(1, 3);
        QuadratureRule rule = default_rule(3);
        BasisTable geom(3, rule.points);
        double worst = 0;
        for (int t = 0; t < mesh.n_elements(); ++t)
            for (int q = 0; q < rule.size(); ++q) {
                GeometryFrame fr = frame_from_table(mesh, t, geom, q);
                worst = std::max(worst, (fr.P * fr.P - fr.P).cwiseAbs().maxCoeff());
                worst = std::max(worst, (fr.P * fr.nu).cwiseAbs().maxCoeff());
                worst = std::max(worst, (fr.B * fr.nu).cwiseAbs().maxCoeff());
                worst = std::max(worst, std::abs(fr.B.trace() - fr.H));
            }
        report("frame algebra P^2=P, P nu=0, B nu=0, H=tr B", worst <= 1e-12, worst, 1e-12);
    }
    {
        CurvedMesh mesh = make_icosphere(2, 3);
        double err = std::abs(surface_area(mesh) - 4 * M_PI);
        report("icosphere level 2 area close to 4 pi", err <= 5e-4, err, 5e-4);
    }
    {
        CurvedMesh mesh = make_icosphere(1, 3);
        auto vel = build_space(mesh, 3);
        FlowState st{DiscreteField(vel, 3), DiscreteField(build_space(mesh, 2), 1), mesh, 0.0};
        NSParams prm;
        prm.tau = 1e-3;
        FlowState nx = ns_step(st, mesh, DiscreteField(vel, 3), DiscreteField(vel, 1), prm);
        double worst = std::max(nx.u.coeff.cwiseAbs().maxCoeff(), nx.p.coeff.cwiseAbs().maxCoeff());
        report("zero-data flow step returns zero", worst <= 1e-12, worst, 1e-12);
    }
    {
        CurvedMesh mesh = make_icosphere(2, 3);
        EvolutionState est{mesh, init_curvature(mesh), 0.0};
        NormalVelocitySpec spec;
        MoveResult mv = mesh_move_step(est, spec, 1e-3);
        double ynorm = l2_norm(mv.Y);
        report("sphere is stationary up to tangential relaxation", ynorm <= 2e-5, ynorm, 2e-5);
        double drift = std::abs(surface_area(mv.mesh_new) - surface_area(mesh)) / surface_area(mesh);
        report("stationary step conserves area", drift <= 1e-7, drift, 1e-7);
    }
    {
        std::vector<DiagnosticsRow> rows{{0, 0.0, 0.1, 4 * M_PI, 1e-5, 2e-6, 1, 0.0},
                                         {1, 1e-3, 0.2, 4 * M_PI, 2e-5, 3e-6, 2, 0.0}};
        auto path = (std::filesystem::temp_directory_path() / "surfflow_check.csv").string();
        write_csv(rows, path);
        auto back = read_csv(path);
        bool ok = back.size() == 2 && back[1].E_kin == 0.2 && back[1].t == 1e-3;
        report("CSV round trip", ok, ok ? 0.0 : 1.0, 0.0);
    }

    if (failed) std::printf("%d check(s) failed\n", failed);
    else std::printf("all checks passed\n");
    return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"incompressible surface flow on evolving closed surfaces"};
    app.require_subcommand(1);

    ConfigArgs run_args, conv_args, seq_args;
    std::string levels_spec = "1,2,3";

    CLI::App* run = app.add_subcommand("run", "evolving-sphere simulation (icosphere or mesh file)");
    add_config_flags(run, run_args);

    CLI::App* conv = app.add_subcommand("converge", "refinement study of e_div and e_N");
    add_config_flags(conv, conv_args);
    conv->add_option("--levels", levels_spec, "comma-separated icosphere levels (default 1,2,3)");

    CLI::App* seq = app.add_subcommand("sequence", "flow on a directory of mesh frames");
    add_config_flags(seq, seq_args);
    seq->add_option("dir", [&seq_args](const std::vector<std::string>& v) {
        seq_args.overrides.emplace_back("sequence_dir", v.front());
        return true;
    }, "sequence directory (same as --sequence_dir)");

    CLI::App* check = app.add_subcommand("check", "invariant self-test suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            print_run_summary(run_perturbed_sphere(build_config(run_args)));
        } else if (conv->parsed()) {
            ConvergenceResult cv = run_convergence(build_config(conv_args), parse_levels(levels_spec));
            std::printf("%6s %12s %12s %12s %8s %8s\n", "level", "h", "e_div", "e_N", "eoc_div",
                        "eoc_N");
            for (std::size_t i = 0; i < cv.levels.size(); ++i)
                std::printf("%6d %12.6e %12.6e %12.6e %8.3f %8.3f\n", cv.levels[i], cv.h[i],
                            cv.e_div[i], cv.e_N[i], cv.eoc_div[i], cv.eoc_N[i]);
            std::printf("wrote %s\n", cv.table_path.c_str());
        } else if (seq->parsed()) {
            print_run_summary(run_sequence(build_config(seq_args)));
        } else if (check->parsed()) {
            return run_check();
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
