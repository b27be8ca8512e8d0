#pragma once

// Text formats: snapshots, the per-step diagnostics CSV, the sweep CSV.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fenecongest/error.hpp"
#include "fenecongest/grid.hpp"

namespace fenecongest {

inline constexpr int kSnapshotFormatVersion = 1;

/// 17 significant digits, enough to round-trip a double.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::optional<double> read_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

struct Snapshot {
    double time = 0.0;
    int nx = 0;
    int nq = 0;
    int K = 1;
    double gamma = 0.0;
    std::vector<double> x, rho, u, eta, p, tau1;  ///< u sits on the right face of each cell
    std::optional<ConfigDistribution> psi_hat;

    bool operator==(const Snapshot&) const = default;
};

inline const std::vector<std::string>& snapshot_columns() {
    static const std::vector<std::string> c{"x", "rho", "u", "eta", "p", "tau1"};
    return c;
}

inline std::string psi_path(const std::string& path) { return path + ".psi"; }

inline void write_snapshot(const Snapshot& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write snapshot " + path);
    out << "# format_version=" << kSnapshotFormatVersion << "\n";
    out << "# time=" << format_double(s.time) << "\n";
    out << "# nx=" << s.nx << "\n";
    out << "# nq=" << s.nq << "\n";
    out << "# K=" << s.K << "\n";
    out << "# gamma=" << format_double(s.gamma) << "\n";
    out << "# columns=x,rho,u,eta,p,tau1\n";
    for (int j = 0; j < s.nx; ++j) {
        out << format_double(s.x[j]) << ',' << format_double(s.rho[j]) << ',' << format_double(s.u[j]) << ','
            << format_double(s.eta[j]) << ',' << format_double(s.p[j]) << ',' << format_double(s.tau1[j]) << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
    if (s.psi_hat) {
        std::ofstream ps(psi_path(path));
        if (!ps) throw Error(ErrorCode::IoError, "cannot write " + psi_path(path));
        const auto& psi = *s.psi_hat;
        ps << "# format_version=" << kSnapshotFormatVersion << "\n";
        ps << "# K=" << s.K << "\n# nq=" << s.nq << "\n";
        ps << "# columns=x_index";
        for (int i = 0; i < s.K; ++i) ps << ",q_index_" << (i + 1);
        ps << ",psi_hat\n";
        for (std::size_t j = 0; j < psi.nx; ++j)
            for (std::size_t m = 0; m < psi.n_config; ++m) {
                ps << j;
                // spring 0 varies slowest
                std::size_t rest = m, stride = psi.n_config;
                for (int i = 0; i < s.K; ++i) {
                    stride /= static_cast<std::size_t>(s.nq);
                    ps << ',' << rest / stride;
                    rest %= stride;
                }
                ps << ',' << format_double(psi(j, m)) << '\n';
            }
        if (!ps) throw Error(ErrorCode::IoError, "write failed for " + psi_path(path));
    }
}

namespace detail {

struct LineReader {
    std::ifstream in;
    std::string path;
    long number = 0;
    std::string line;

    bool next() {
        if (!std::getline(in, line)) return false;
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::FormatError, path + ":" + std::to_string(number) + ": " + what);
    }
};

// Reads '#' key=value lines; leaves the first body line in r.line.
inline std::map<std::string, std::string> read_header(LineReader& r, bool& have_body) {
    std::map<std::string, std::string> h;
    have_body = false;
    while (r.next()) {
        if (r.line.empty() || r.line[0] != '#') {
            have_body = true;
            break;
        }
        std::string_view body(r.line);
        body.remove_prefix(1);
        while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) r.fail("header line without key=value");
        h[std::string(body.substr(0, eq))] = std::string(body.substr(eq + 1));
    }
    const auto v = h.find("format_version");
    if (v == h.end()) r.fail("missing format_version header");
    if (v->second != std::to_string(kSnapshotFormatVersion))
        r.fail("unsupported format_version=" + v->second + " (expected " + std::to_string(kSnapshotFormatVersion) + ")");
    return h;
}

inline long header_int(const std::map<std::string, std::string>& h, const std::string& key, const LineReader& r) {
    const auto it = h.find(key);
    if (it == h.end()) r.fail("missing header " + key);
    long v = 0;
    const auto& s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) r.fail("bad header " + key + "=" + s);
    return v;
}

inline double header_double(const std::map<std::string, std::string>& h, const std::string& key,
                            const LineReader& r) {
    const auto it = h.find(key);
    if (it == h.end()) r.fail("missing header " + key);
    const auto v = read_double(it->second);
    if (!v) r.fail("bad header " + key + "=" + it->second);
    return *v;
}

}  // namespace detail

inline Snapshot read_snapshot(const std::string& path, bool with_psi = false) {
    detail::LineReader r{std::ifstream(path), path};
    if (!r.in) throw Error(ErrorCode::IoError, "cannot open snapshot " + path);
    bool body = false;
    const auto h = detail::read_header(r, body);
    Snapshot s;
    s.time = detail::header_double(h, "time", r);
    s.nx = static_cast<int>(detail::header_int(h, "nx", r));
    s.nq = static_cast<int>(detail::header_int(h, "nq", r));
    s.K = static_cast<int>(detail::header_int(h, "K", r));
    s.gamma = detail::header_double(h, "gamma", r);
    if (s.nx < 0 || s.nq < 0 || s.K < 1) r.fail("invalid grid sizes in header");
    const auto cols = h.find("columns");
    if (cols == h.end() || cols->second != "x,rho,u,eta,p,tau1") r.fail("unexpected columns header");
    std::vector<double>* fields[] = {&s.x, &s.rho, &s.u, &s.eta, &s.p, &s.tau1};
    for (int j = 0; j < s.nx; ++j) {
        if (j > 0 && !r.next()) {
            ++r.number;
            r.fail("truncated: expected " + std::to_string(s.nx) + " rows, found " + std::to_string(j));
        }
        if (j == 0 && !body) {
            ++r.number;
            r.fail("truncated: no data rows");
        }
        const auto parts = split_commas(r.line);
        if (parts.size() != 6) r.fail("expected 6 fields, found " + std::to_string(parts.size()));
        for (int c = 0; c < 6; ++c) {
            const auto v = read_double(parts[c]);
            if (!v) r.fail("bad number '" + std::string(parts[c]) + "'");
            fields[c]->push_back(*v);
        }
    }
    if (r.next() && !r.line.empty()) r.fail("unexpected extra row");
    if (with_psi) {
        detail::LineReader p{std::ifstream(psi_path(path)), psi_path(path)};
        if (!p.in) throw Error(ErrorCode::IoError, "cannot open " + psi_path(path));
        bool pbody = false;
        detail::read_header(p, pbody);
        std::size_t nc = 1;
        for (int i = 0; i < s.K; ++i) nc *= static_cast<std::size_t>(s.nq);
        ConfigDistribution psi(static_cast<std::size_t>(s.nx), nc, 0.0);
        const std::size_t rows = psi.nx * nc;
        for (std::size_t k = 0; k < rows; ++k) {
            if ((k == 0 && !pbody) || (k > 0 && !p.next())) {
                ++p.number;
                p.fail("truncated: expected " + std::to_string(rows) + " rows");
            }
            const auto parts = split_commas(p.line);
            if (parts.size() != static_cast<std::size_t>(s.K) + 2) p.fail("wrong field count");
            const auto v = read_double(parts.back());
            if (!v) p.fail("bad number");
            psi.values[k] = *v;
        }
        s.psi_hat = std::move(psi);
    }
    return s;
}

inline const std::vector<std::string>& diagnostics_columns() {
    static const std::vector<std::string> c{"step",     "time",       "mass_rho", "mass_psi",
                                            "mass_eta", "energy_total", "diss_total", "work",
                                            "sup_rho",  "excess_l2",  "complementarity", "eta_consistency_l1"};
    return c;
}

inline const std::vector<std::string>& sweep_columns() {
    static const std::vector<std::string> c{"gamma",           "excess_l1",           "excess_l2", "excess_l4",
                                            "pressure_l1",     "complementarity",     "congestion_fraction",
                                            "max_rho",         "status"};
    return c;
}

struct DiagnosticsRow {
    long step = 0;
    double time = 0.0;
    double mass_rho = 0.0, mass_psi = 0.0, mass_eta = 0.0;
    double energy_total = 0.0, diss_total = 0.0, work = 0.0;
    double sup_rho = 0.0, excess_l2 = 0.0, complementarity = 0.0, eta_consistency_l1 = 0.0;

    std::vector<double> values() const {
        return {static_cast<double>(step), time,     mass_rho,  mass_psi,  mass_eta,        energy_total,
                diss_total,                work,     sup_rho,   excess_l2, complementarity, eta_consistency_l1};
    }
};

inline std::string join_columns(const std::vector<std::string>& c) {
    std::string s;
    for (std::size_t i = 0; i < c.size(); ++i) s += (i ? "," : "") + c[i];
    return s;
}

inline std::string format_row(const DiagnosticsRow& r) {
    std::string s = std::to_string(r.step);
    const auto v = r.values();
    for (std::size_t i = 1; i < v.size(); ++i) s += "," + format_double(v[i]);
    return s;
}

/// Appends one row per step; the header is written on open.
class DiagnosticsWriter {
public:
    explicit DiagnosticsWriter(const std::string& path) : out_(path), path_(path) {
        if (!out_) throw Error(ErrorCode::IoError, "cannot write " + path);
        out_ << join_columns(diagnostics_columns()) << '\n';
    }
    void append(const DiagnosticsRow& r) {
        out_ << format_row(r) << '\n';
        if (!out_) throw Error(ErrorCode::IoError, "write failed for " + path_);
    }
    void flush() { out_.flush(); }

private:
    std::ofstream out_;
    std::string path_;
};

/// A CSV as header names plus rows of raw fields.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw Error(ErrorCode::FormatError, "missing column " + name);
    }
    double number(std::size_t row, const std::string& name) const {
        const auto v = read_double(rows.at(row).at(column(name)));
        if (!v) throw Error(ErrorCode::FormatError, "column " + name + " row " + std::to_string(row) + " is not a number");
        return *v;
    }
};

inline CsvTable read_csv(const std::string& path, const std::vector<std::string>* expected = nullptr) {
    detail::LineReader r{std::ifstream(path), path};
    if (!r.in) throw Error(ErrorCode::IoError, "cannot open " + path);
    CsvTable t;
    if (!r.next()) r.fail("empty file");
    for (auto c : split_commas(r.line)) t.columns.emplace_back(c);
    if (expected && t.columns != *expected)
        r.fail("columns '" + r.line + "' do not match the schema '" + join_columns(*expected) + "'");
    while (r.next()) {
        if (r.line.empty()) continue;
        std::vector<std::string> row;
        for (auto c : split_commas(r.line)) row.emplace_back(c);
        if (row.size() != t.columns.size()) r.fail("expected " + std::to_string(t.columns.size()) + " fields");
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline void ensure_directory(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create directory " + dir + ": " + ec.message());
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace fenecongest
