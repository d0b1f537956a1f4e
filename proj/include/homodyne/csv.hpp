#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "homodyne/analysis.hpp"
#include "homodyne/errors.hpp"
#include "homodyne/esa.hpp"

namespace homodyne {

namespace detail {

inline std::string fmt_double(double v, const char* spec = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

// Quote a CSV field only when it needs it.
inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace detail

/// Write-then-rename, so readers never observe a partial file.
inline void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open for writing: " + tmp.string());
        out << content;
        if (!out.flush()) throw io_error("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw io_error("rename to " + path.string() + " failed: " + ec.message());
}

inline constexpr const char* kTraceCsvHeader = "t_s,power_db_rel_shot";

inline std::string trace_to_csv(const EsaTrace& trace) {
    std::string out = kTraceCsvHeader;
    out += '\n';
    for (std::size_t i = 0; i < trace.t_s.size(); ++i) {
        out += detail::fmt_double(trace.t_s[i]);
        out += ',';
        out += detail::fmt_double(trace.power_db[i]);
        out += '\n';
    }
    return out;
}

inline void write_trace_csv(const std::filesystem::path& path, const EsaTrace& trace) {
    atomic_write_text(path, trace_to_csv(trace));
}

/// Read a trace CSV back. Acquisition settings are not stored in the CSV;
/// callers supply them (typically from the scenario config) and n_points is
/// taken from the file. The assembled trace is validated, which rejects
/// tampered files with non-monotonic timestamps or the wrong span.
inline EsaTrace read_trace_csv(const std::filesystem::path& path, EsaConfig meta,
                               TraceKind kind = TraceKind::signal) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open trace file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw validation_error(path.string(), "empty trace file");
    if (line == std::string(kTraceCsvHeader) + "\r") line.pop_back();
    if (line != kTraceCsvHeader)
        throw validation_error(path.string(), "expected header '" +
                                                  std::string(kTraceCsvHeader) + "', got '" +
                                                  line + "'");
    EsaTrace trace;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        double t = 0.0, p = 0.0;
        if (std::sscanf(line.c_str(), "%lf,%lf", &t, &p) != 2)
            throw validation_error(path.string(), "malformed row " + std::to_string(row));
        trace.t_s.push_back(t);
        trace.power_db.push_back(p);
    }
    meta.n_points = static_cast<int>(trace.t_s.size());
    trace.meta = meta;
    trace.kind = kind;
    trace.validate();
    return trace;
}

inline constexpr const char* kSweepCsvHeader =
    "f_hz,m_sq_db,m_asq_db,clearance_db,eta_el,eta_total,crystal_sq_db,crystal_asq_db,"
    "detectable,note";

inline std::string sweep_to_csv(const std::vector<SqueezingReport>& reports) {
    auto num = [](double v, const char* spec) {
        return std::isfinite(v) ? detail::fmt_double(v, spec) : std::string{};
    };
    std::string out = kSweepCsvHeader;
    out += '\n';
    for (const auto& r : reports) {
        out += detail::fmt_double(r.f_center_hz, "%.10g");
        out += ',' + num(r.m_sq_db, "%.6f");
        out += ',' + num(r.m_asq_db, "%.6f");
        out += ',' + num(r.clearance_db, "%.6f");
        out += ',' + num(r.eta_el, "%.6f");
        out += ',' + num(r.eta_assumed, "%.6f");
        out += ',' + num(r.crystal_sq_db, "%.6f");
        out += ',' + num(r.crystal_asq_db, "%.6f");
        out += ',';
        out += r.detectable ? "true" : "false";
        out += ',' + detail::csv_quote(r.note);
        out += '\n';
    }
    return out;
}

inline void write_sweep_csv(const std::filesystem::path& path,
                            const std::vector<SqueezingReport>& reports) {
    atomic_write_text(path, sweep_to_csv(reports));
}

}  // namespace homodyne
