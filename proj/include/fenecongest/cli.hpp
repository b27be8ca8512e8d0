#pragma once

// Command-line surface: check-potential, run, sweep, report.
// Exit codes: 0 success, 1 validation failure or failed certificate, 2 runtime failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fenecongest/run.hpp"

namespace fenecongest {

inline int exit_code_for(const Error& e) { return e.code() == ErrorCode::ValidationError ? 1 : 2; }

inline int check_potential_command(std::vector<double> b, int K, int nodes, std::ostream& out) {
    if (K > 1 && b.size() == 1) b.assign(static_cast<std::size_t>(K), b[0]);
    if (K >= 1 && static_cast<int>(b.size()) != K) throw ValidationError({"--b: give one value or K values"});
    char line[512];
    std::snprintf(line, sizeof line, "%-6s %10s %8s %12s %12s %12s %12s %14s %12s %s\n", "spring", "b", "theta", "c1",
                  "c2", "c3", "c4", "moment_bound", "norm_err", "status");
    out << line;
    bool all = true;
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (!(b[i] > 0.0)) throw ValidationError({"--b: extensibility must be positive"});
        const auto cert = certify_potential(b[i]);
        double norm_err = std::numeric_limits<double>::quiet_NaN();
        if (cert.passed) {
            const auto quad = build_quadrature(nodes, b[i]);
            double s = 0.0;
            for (std::size_t k = 0; k < quad.size(); ++k) s += quad.weights[k] * partial_maxwellian(quad.node(k), b[i]);
            norm_err = std::abs(s - 1.0);
        }
        all = all && cert.passed;
        std::snprintf(line, sizeof line, "%-6zu %10.6g %8.4g %12.6g %12.6g %12.6g %12.6g %14.8g %12.3g %s\n", i + 1,
                      cert.b, cert.theta, cert.c1, cert.c2, cert.c3, cert.c4, cert.moment_bound, norm_err,
                      cert.passed ? "PASS" : "FAIL");
        out << line;
    }
    return all ? 0 : 1;
}

inline void print_summary(const std::string& path, std::ostream& out) {
    out << read_text(path);
}

inline int report_command(const std::string& dir, std::ostream& out) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, "no such output directory " + dir);
    bool any = false;
    if (fs::exists(dir + "/summary.txt")) {
        out << "== " << dir << "/summary.txt\n";
        print_summary(dir + "/summary.txt", out);
        any = true;
    }
    if (fs::exists(dir + "/diagnostics.csv")) {
        const auto cols = diagnostics_columns();
        const auto t = read_csv(dir + "/diagnostics.csv", &cols);
        out << "== diagnostics.csv: " << t.rows.size() << " rows\n";
        if (!t.rows.empty()) {
            const std::size_t last = t.rows.size() - 1;
            for (const auto& c : cols) out << "  " << c << " = " << t.rows[last][t.column(c)] << "\n";
        }
        any = true;
    }
    if (fs::exists(dir + "/sweep.csv")) {
        const auto cols = sweep_columns();
        const auto t = read_csv(dir + "/sweep.csv", &cols);
        out << "== sweep.csv: " << t.rows.size() << " rows\n";
        char line[400];
        std::snprintf(line, sizeof line, "%8s %12s %12s %12s %12s %14s %10s %10s %s\n", "gamma", "excess_l1",
                      "excess_l2", "excess_l4", "pressure_l1", "complementarity", "cong_frac", "max_rho", "status");
        out << line;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            std::snprintf(line, sizeof line, "%8g %12.5g %12.5g %12.5g %12.5g %14.5g %10.4g %10.6g %s\n",
                          t.number(i, "gamma"), t.number(i, "excess_l1"), t.number(i, "excess_l2"),
                          t.number(i, "excess_l4"), t.number(i, "pressure_l1"), t.number(i, "complementarity"),
                          t.number(i, "congestion_fraction"), t.number(i, "max_rho"),
                          t.rows[i][t.column("status")].c_str());
            out << line;
        }
        any = true;
    }
    if (!any) throw Error(ErrorCode::IoError, dir + " contains no summary.txt, diagnostics.csv or sweep.csv");
    return 0;
}

inline int run_command(const std::string& config_path, std::string out_dir, int threads, std::ostream& out) {
    RunConfig c = load_config(config_path);
    if (threads > 0) c.threads = threads;
    if (out_dir.empty()) out_dir = c.output_dir;
    const auto res = simulate(c, out_dir);
    out << "run finished: " << res.steps << " steps to t = " << format_double(res.final.time) << "\n";
    print_summary(out_dir + "/summary.txt", out);
    return 0;
}

inline int sweep_command(const std::string& config_path, std::vector<double> gammas, std::vector<double> p_norms,
                         std::string out_dir, int jobs, std::ostream& out, std::ostream& err) {
    RunConfig c = load_config(config_path);
    if (gammas.empty()) gammas = c.gammas;
    if (p_norms.empty()) p_norms = c.p_norms;
    if (out_dir.empty()) out_dir = c.output_dir;
    if (jobs <= 0) jobs = c.sweep_parallel ? static_cast<int>(gammas.size()) : 1;
    const auto rep = gamma_sweep(c, gammas, p_norms, jobs);
    write_sweep(rep, out_dir);
    out << "wrote " << out_dir << "/sweep.csv (" << rep.rows.size() << " rows)\n";
    int code = 0;
    for (const auto& r : rep.rows)
        if (r.status != "ok") {
            err << "gamma " << format_double(r.gamma) << " failed: " << r.status << "\n";
            code = 2;
        }
    report_command(out_dir, out);
    return code;
}

inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Coupled FENE kinetic / compressible fluid simulator with a stiff-pressure sweep"};
    app.require_subcommand(1);

    std::vector<double> b;
    int K = 0, nodes = 32;
    auto* check = app.add_subcommand("check-potential", "certify FENE spring hypotheses");
    check->add_option("--b", b, "extensibility per spring")->required()->delimiter(',');
    check->add_option("--K", K, "spring count (replicates a single --b)");
    check->add_option("--nodes", nodes, "quadrature nodes for the normalization check")->check(CLI::Range(4, 4096));

    std::string config, out_dir;
    int threads = 0;
    auto* run = app.add_subcommand("run", "integrate one configuration");
    run->add_option("--config", config, "config file")->required();
    run->add_option("--out", out_dir, "output directory (defaults to output.dir)");
    run->add_option("--threads", threads, "override output.threads");

    std::vector<double> gammas, p_norms;
    int jobs = 0;
    auto* sweep = app.add_subcommand("sweep", "run the gamma ladder");
    sweep->add_option("--config", config, "config file")->required();
    sweep->add_option("--gammas", gammas, "ascending gamma list")->delimiter(',');
    sweep->add_option("--p-norms", p_norms, "norms for the decay table")->delimiter(',');
    sweep->add_option("--out", out_dir, "output directory");
    sweep->add_option("--jobs", jobs, "parallel runs (defaults from sweep.parallel)");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "summarize an output directory");
    report->add_option("dir", report_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : 1;
    }
    try {
        if (*check) return check_potential_command(b, K, nodes, out);
        if (*run) return run_command(config, out_dir, threads, out);
        if (*sweep) return sweep_command(config, gammas, p_norms, out_dir, jobs, out, err);
        if (*report) return report_command(report_dir, out);
    } catch (const ValidationError& e) {
        err << "invalid configuration:\n";
        for (const auto& v : e.violations()) err << "  " << v << "\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace fenecongest
