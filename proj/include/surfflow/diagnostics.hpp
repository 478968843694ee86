#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "surfflow/core.hpp"

namespace surfflow {

struct DiagnosticsRow {
    long long n = 0;
    double t = 0;
    double E_kin = 0;
    double area = 0;
    double div_error = 0;
    double normal_error = 0;
    int fp_iterations = 0;
    double wall_time_ms = 0;
};

namespace detail {

// Shortest round-trip decimal form, independent of the global locale.
inline std::string fmt_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string fmt_int(long long v) {
    char buf[24];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError("bad number '" + s + "'");
    return v;
}

inline long long parse_int(const std::string& s) {
    long long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError("bad integer '" + s + "'");
    return v;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace detail

inline const char* csv_header() {
    return "n,t,E_kin,area,div_error,normal_error,fp_iterations,wall_time_ms";
}

inline void append_csv_row(std::ostream& os, const DiagnosticsRow& r) {
    using detail::fmt_double;
    using detail::fmt_int;
    os << fmt_int(r.n) << ',' << fmt_double(r.t) << ',' << fmt_double(r.E_kin) << ','
       << fmt_double(r.area) << ',' << fmt_double(r.div_error) << ','
       << fmt_double(r.normal_error) << ',' << fmt_int(r.fp_iterations) << ','
       << fmt_double(r.wall_time_ms) << '\n';
}

inline void write_csv(const std::vector<DiagnosticsRow>& rows, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path);
    os << csv_header() << '\n';
    for (const auto& r : rows) append_csv_row(os, r);
    os.flush();
    if (!os) throw IoError("write failed for " + path);
}

inline std::vector<DiagnosticsRow> read_csv(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw ParseError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != csv_header()) throw ParseError(path + ": unexpected CSV header");
    std::vector<DiagnosticsRow> rows;
    long long lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cols = detail::split(line, ',');
        if (cols.size() != 8)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected 8 columns");
        DiagnosticsRow r;
        r.n = detail::parse_int(cols[0]);
        r.t = detail::parse_double(cols[1]);
        r.E_kin = detail::parse_double(cols[2]);
        r.area = detail::parse_double(cols[3]);
        r.div_error = detail::parse_double(cols[4]);
        r.normal_error = detail::parse_double(cols[5]);
        r.fp_iterations = static_cast<int>(detail::parse_int(cols[6]));
        r.wall_time_ms = detail::parse_double(cols[7]);
        if (!rows.empty() && !(r.t > rows.back().t))
            throw ParseError(path + ":" + std::to_string(lineno) + ": non-monotone time column");
        rows.push_back(r);
    }
    return rows;
}

}  // namespace surfflow
