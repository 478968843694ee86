#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "surfflow/diagnostics.hpp"
#include "surfflow/mesh.hpp"
#include "surfflow/mesh_io.hpp"

namespace surfflow {

struct SimConfig {
    std::string geometry = "icosphere:2";  // icosphere:<level> or a mesh file path
    std::string sequence_dir;
    int order = 3;
    double tau = 1e-3;
    double t_end = 1.0;
    double Re = 1.0;
    double beta0 = 100.0;
    double alpha = 1e-3;
    double epsilon = 1e-10;
    int quad_degree = 0;  // 0 = automatic (2k+2)
    std::uint64_t seed = 1;
    std::string u0 = "zero";           // zero | random
    std::string forcing = "perturbed";  // perturbed | zero
    std::string output_dir = "out";
    int cadence = 10;
    std::string formats = "csv,vtk";
    bool project_w = false;
    bool exact_normal = false;
    bool analytic_V = false;
    bool timing = false;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline bool parse_flag(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError("key '" + key + "' expects a boolean, got '" + v + "'");
}

inline double parse_cfg_double(const std::string& key, const std::string& v) {
    try {
        return parse_double(v);
    } catch (const ParseError&) {
        throw ConfigError("key '" + key + "' expects a number, got '" + v + "'");
    }
}

inline long long parse_cfg_int(const std::string& key, const std::string& v) {
    try {
        return parse_int(v);
    } catch (const ParseError&) {
        throw ConfigError("key '" + key + "' expects an integer, got '" + v + "'");
    }
}

}  // namespace detail

inline void set_key(SimConfig& c, const std::string& raw_key, const std::string& raw_value) {
    std::string key = detail::trim(raw_key);
    std::string v = detail::trim(raw_value);
    if (key == "geometry") c.geometry = v;
    else if (key == "sequence_dir") c.sequence_dir = v;
    else if (key == "order") c.order = int(detail::parse_cfg_int(key, v));
    else if (key == "tau") c.tau = detail::parse_cfg_double(key, v);
    else if (key == "t_end") c.t_end = detail::parse_cfg_double(key, v);
    else if (key == "Re") c.Re = detail::parse_cfg_double(key, v);
    else if (key == "beta0") c.beta0 = detail::parse_cfg_double(key, v);
    else if (key == "alpha") c.alpha = detail::parse_cfg_double(key, v);
    else if (key == "epsilon") c.epsilon = detail::parse_cfg_double(key, v);
    else if (key == "quad_degree") c.quad_degree = int(detail::parse_cfg_int(key, v));
    else if (key == "seed") c.seed = std::uint64_t(detail::parse_cfg_int(key, v));
    else if (key == "u0") c.u0 = v;
    else if (key == "forcing") c.forcing = v;
    else if (key == "output_dir") c.output_dir = v;
    else if (key == "cadence") c.cadence = int(detail::parse_cfg_int(key, v));
    else if (key == "formats") c.formats = v;
    else if (key == "project_w") c.project_w = detail::parse_flag(key, v);
    else if (key == "exact_normal") c.exact_normal = detail::parse_flag(key, v);
    else if (key == "analytic_V") c.analytic_V = detail::parse_flag(key, v);
    else if (key == "timing") c.timing = detail::parse_flag(key, v);
    else throw ConfigError("unknown config key '" + key + "'");
}

inline SimConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file " + path);
    SimConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        set_key(c, line.substr(0, eq), line.substr(eq + 1));
    }
    return c;
}

inline bool format_enabled(const SimConfig& c, const std::string& what) {
    for (const auto& tok : detail::split(c.formats, ','))
        if (detail::trim(tok) == what) return true;
    return false;
}

inline void validate_config(const SimConfig& c) {
    if (!(c.tau > 0)) throw ConfigError("tau must be positive");
    if (!(c.t_end > 0)) throw ConfigError("t_end must be positive");
    if (c.order < 2) throw ConfigError("order must be at least 2 (Taylor-Hood pressure needs degree >= 1)");
    if (c.cadence < 1) throw ConfigError("cadence must be at least 1");
    if (!(c.Re > 0)) throw ConfigError("Re must be positive");
    if (!(c.beta0 > 0)) throw ConfigError("beta0 must be positive");
    if (!(c.alpha >= 0)) throw ConfigError("alpha must be nonnegative");
    if (!(c.epsilon > 0)) throw ConfigError("epsilon must be positive");
    if (c.quad_degree < 0) throw ConfigError("quad_degree must be nonnegative");
    if (c.u0 != "zero" && c.u0 != "random") throw ConfigError("u0 must be 'zero' or 'random'");
    if (c.forcing != "perturbed" && c.forcing != "zero")
        throw ConfigError("forcing must be 'perturbed' or 'zero'");
    for (const auto& tok : detail::split(c.formats, ',')) {
        std::string f = detail::trim(tok);
        if (f != "csv" && f != "vtk" && !f.empty())
            throw ConfigError("unknown output format '" + f + "'");
    }
}

inline QuadratureRule config_rule(const SimConfig& c) {
    return c.quad_degree > 0 ? quadrature_rule(c.quad_degree) : default_rule(c.order);
}

inline CurvedMesh load_geometry(const SimConfig& c) {
    const std::string prefix = "icosphere:";
    if (c.geometry.rfind(prefix, 0) == 0) {
        long long level = detail::parse_cfg_int("geometry", c.geometry.substr(prefix.size()));
        if (level < 0) throw ConfigError("icosphere level must be nonnegative");
        return make_icosphere(int(level), c.order);
    }
    return load_mesh_sequence({c.geometry}, c.order).front();
}

}  // namespace surfflow
