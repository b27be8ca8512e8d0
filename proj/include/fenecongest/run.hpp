#pragma once

// Time integration driver, output files, and the gamma sweep.

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "fenecongest/config.hpp"
#include "fenecongest/diagnostics.hpp"
#include "fenecongest/io.hpp"
#include "fenecongest/limit.hpp"

namespace fenecongest {

inline Snapshot make_snapshot(const SystemState& s, const CoupledSolver& solver, const RunConfig& c, bool with_psi) {
    const Grid1D& g = solver.grid();
    const auto st = solver.stress_field(s.psi_hat);
    Snapshot snap;
    snap.time = s.time;
    snap.nx = g.nx;
    snap.nq = c.nq;
    snap.K = c.K;
    snap.gamma = c.gamma();
    snap.rho = s.fluid.rho;
    snap.u = s.fluid.u;
    snap.eta = st.eta;
    snap.p = pressure(s.fluid.rho, solver.fluid().pressure_law);
    snap.tau1 = st.tau1;
    for (int j = 0; j < g.nx; ++j) snap.x.push_back(g.cell_center(j));
    if (with_psi) snap.psi_hat = s.psi_hat;
    return snap;
}

inline double eta_consistency_l1(const SystemState& s, const CoupledSolver& solver) {
    const auto eta = polymer_density(s.psi_hat, solver.model());
    double gap = 0.0;
    for (std::size_t j = 0; j < eta.size(); ++j) gap += std::abs(s.eta_direct[j] - eta[j]);
    return gap * solver.grid().h();
}

inline DiagnosticsRow diagnostics_row(const SystemState& s, const CoupledSolver& solver, const EnergyBreakdown& e) {
    const double h = solver.grid().h();
    const auto& law = solver.fluid().pressure_law;
    DiagnosticsRow r;
    r.step = s.step_index;
    r.time = s.time;
    for (int j = 0; j < solver.grid().nx; ++j) {
        r.mass_rho += s.fluid.rho[j] * h;
        r.mass_eta += s.eta_direct[j] * h;
    }
    r.mass_psi = solver.kinetic().total_mass(s.psi_hat);
    r.energy_total = e.functional();
    r.diss_total = e.dissipation();
    r.work = e.work;
    r.sup_rho = max_value(s.fluid.rho);
    r.excess_l2 = excess_norm(s.fluid.rho, 2.0, law, h);
    r.complementarity = complementarity_residual(s.fluid.rho, law, h);
    r.eta_consistency_l1 = eta_consistency_l1(s, solver);
    return r;
}

inline const std::vector<std::string>& energy_columns() {
    static const std::vector<std::string> c{
        "step",      "time",        "kinetic",         "pressure_energy", "eta_sq",     "eta_entropy",
        "psi_entropy", "diss_shear", "diss_bulk",      "diss_eta_grad",   "diss_eta_fisher", "diss_psi_x",
        "diss_psi_q", "work",       "total",           "functional"};
    return c;
}

inline std::string format_energy_row(const EnergyBreakdown& e) {
    std::string s = std::to_string(e.step);
    for (double v : {e.time, e.kinetic, e.pressure_energy, e.eta_sq, e.eta_entropy, e.psi_entropy, e.diss_shear,
                     e.diss_bulk, e.diss_eta_grad, e.diss_eta_fisher, e.diss_psi_x, e.diss_psi_q, e.work, e.total,
                     e.functional()})
        s += "," + format_double(v);
    return s;
}

struct RunResult {
    SystemState initial;
    SystemState final;
    std::vector<DiagnosticsRow> rows;      ///< one per step, none for step 0
    std::vector<EnergyBreakdown> energy;   ///< includes step 0
    EnergyVerdict energy_verdict;
    double pressure_time_integral = 0.0;   ///< sum dt int (rho/rho*)^gamma
    double complementarity_integral = 0.0; ///< sum dt int (rho/rho*)^gamma |rho/rho* - 1|
    long steps = 0;
    std::size_t clipped_nodes = 0;
    double mass_correction = 0.0;
    int max_kinetic_substeps = 0;
    std::vector<std::string> snapshots;
};

/// Integrates to c.T. With a non-empty out_dir, writes diagnostics.csv,
/// energy.csv, snapshots/ and summary.txt there.
inline RunResult simulate(const RunConfig& c, const std::string& out_dir = {}) {
    const CoupledSolver solver = build_solver(c);
    const Grid1D& g = solver.grid();
    const double h = g.h();
    const auto& law = solver.fluid().pressure_law;
    RunResult res;
    SystemState s = initial_state(c, solver);
    res.initial = s;

    const bool files = !out_dir.empty();
    std::optional<DiagnosticsWriter> diag;
    std::optional<std::ofstream> energy_out;
    auto snapshot = [&](const SystemState& st) {
        if (!files) return;
        char name[64];
        std::snprintf(name, sizeof name, "snapshot_%06ld.csv", st.step_index);
        const std::string path = out_dir + "/snapshots/" + name;
        write_snapshot(make_snapshot(st, solver, c, c.write_psi), path);
        res.snapshots.push_back(path);
    };
    if (files) {
        ensure_directory(out_dir + "/snapshots");
        diag.emplace(out_dir + "/diagnostics.csv");
        energy_out.emplace(out_dir + "/energy.csv");
        if (!*energy_out) throw Error(ErrorCode::IoError, "cannot write " + out_dir + "/energy.csv");
        *energy_out << join_columns(energy_columns()) << '\n';
    }
    res.energy.push_back(energy_breakdown(s, solver));
    if (energy_out) *energy_out << format_energy_row(res.energy.back()) << '\n';
    snapshot(s);

    while (s.time < c.T) {
        if (res.steps >= c.max_steps)
            throw Error(ErrorCode::NonConvergence, "reached time.max_steps = " + std::to_string(c.max_steps) +
                                                       " before T at t = " + format_double(s.time));
        double dt = solver.stable_dt(s);
        bool last = false;
        if (s.time + dt >= c.T) {
            dt = c.T - s.time;
            last = true;
        }
        StepReport report;
        s = solver.step(s, dt, &report);
        if (last) s.time = c.T;
        ++res.steps;
        res.clipped_nodes += report.clipped_nodes;
        res.mass_correction += report.mass_correction;
        res.max_kinetic_substeps = std::max(res.max_kinetic_substeps, report.kinetic_substeps);
        res.pressure_time_integral += dt * stiff_pressure_integral(s.fluid.rho, law, h);
        res.complementarity_integral += dt * complementarity_residual(s.fluid.rho, law, h);
        res.energy.push_back(energy_breakdown(s, solver));
        res.rows.push_back(diagnostics_row(s, solver, res.energy.back()));
        if (diag) diag->append(res.rows.back());
        if (energy_out) *energy_out << format_energy_row(res.energy.back()) << '\n';
        if (c.snapshot_every > 0 && s.step_index % c.snapshot_every == 0 && !last) snapshot(s);
    }
    if (res.steps > 0) snapshot(s);
    res.final = s;
    res.energy_verdict = check_energy_inequality(res.energy, c.energy_c);

    if (files) {
        diag->flush();
        const auto& first = res.energy.front();
        const auto& end = res.energy.back();
        auto rel = [](double a, double b) { return b == 0.0 ? std::abs(a) : std::abs(a - b) / std::abs(b); };
        DiagnosticsRow r0 = diagnostics_row(res.initial, solver, first);
        const DiagnosticsRow& rl = res.rows.empty() ? r0 : res.rows.back();
        double worst_gap = r0.eta_consistency_l1;
        for (const auto& r : res.rows) worst_gap = std::max(worst_gap, r.eta_consistency_l1);
        std::string t;
        auto kv = [&](const std::string& k, const std::string& v) { t += k + "=" + v + "\n"; };
        kv("steps", std::to_string(res.steps));
        kv("final_time", format_double(s.time));
        kv("gamma", format_double(c.gamma()));
        kv("nx", std::to_string(g.nx));
        kv("nq", std::to_string(c.nq));
        kv("K", std::to_string(c.K));
        kv("mass_rho_drift", format_double(rel(rl.mass_rho, r0.mass_rho)));
        kv("mass_psi_drift", format_double(rel(rl.mass_psi, r0.mass_psi)));
        kv("mass_eta_drift", format_double(rel(rl.mass_eta, r0.mass_eta)));
        kv("energy_initial", format_double(first.functional()));
        kv("energy_final", format_double(end.functional()));
        kv("energy_c", format_double(c.energy_c));
        kv("energy_steps_passed", res.energy_verdict.passed ? "true" : "false");
        kv("energy_run_passed", res.energy_verdict.run_passed ? "true" : "false");
        kv("energy_worst_step", std::to_string(res.energy_verdict.worst_step));
        kv("energy_worst_excess", format_double(res.energy_verdict.worst_excess));
        kv("energy_worst_ratio", format_double(res.energy_verdict.worst_ratio));
        kv("c_eta", format_double(first.c_eta));
        kv("eta_consistency_l1_final", format_double(rl.eta_consistency_l1));
        kv("eta_consistency_l1_max", format_double(worst_gap));
        kv("sup_rho_final", format_double(rl.sup_rho));
        kv("excess_l2_final", format_double(rl.excess_l2));
        kv("clipped_nodes", std::to_string(res.clipped_nodes));
        kv("mass_correction", format_double(res.mass_correction));
        kv("max_kinetic_substeps", std::to_string(res.max_kinetic_substeps));
        kv("snapshots", std::to_string(res.snapshots.size()));
        write_text(out_dir + "/summary.txt", t);
    }
    return res;
}

struct SweepRow {
    double gamma = 0.0;
    double excess_l1 = 0.0, excess_l2 = 0.0, excess_l4 = 0.0;
    std::vector<double> excess_p;  ///< one per requested p-norm
    double pressure_l1 = 0.0;
    double complementarity = 0.0;
    double congestion_fraction = 0.0;
    double max_rho = 0.0;
    std::string status = "ok";
};

struct DecayRow {
    double gamma_lo = 0.0, gamma_hi = 0.0, p = 0.0;
    double ratio = 0.0;        ///< excess_p(gamma_hi) / excess_p(gamma_lo)
    double bound_ratio = 0.0;  ///< (gamma_lo / gamma_hi)^((p - 1) / p)
};

struct SweepReport {
    std::vector<double> p_norms;
    std::vector<SweepRow> rows;
    std::vector<DecayRow> decay;
};

inline SweepRow sweep_row(const RunConfig& c, const RunResult& r) {
    const CoupledSolver solver = build_solver(c);
    const auto& law = solver.fluid().pressure_law;
    const double h = c.grid.h();
    const auto& rho = r.final.fluid.rho;
    SweepRow row;
    row.gamma = c.gamma();
    row.excess_l1 = excess_norm(rho, 1.0, law, h);
    row.excess_l2 = excess_norm(rho, 2.0, law, h);
    row.excess_l4 = excess_norm(rho, 4.0, law, h);
    for (double p : c.p_norms) row.excess_p.push_back(excess_norm(rho, p, law, h));
    row.pressure_l1 = c.T > 0.0 ? r.pressure_time_integral / c.T : stiff_pressure_integral(rho, law, h);
    row.complementarity = r.complementarity_integral;
    row.congestion_fraction = congestion_fraction(rho, law, c.congestion_delta);
    row.max_rho = max_value(rho);
    return row;
}

/// One run per gamma from identical initial data. A failed run is recorded in
/// its row's status and the sweep goes on.
inline SweepReport gamma_sweep(const RunConfig& base, const std::vector<double>& gammas,
                               const std::vector<double>& p_norms, int jobs = 1) {
    RunConfig cfg = base;
    cfg.gammas = gammas;
    cfg.p_norms = p_norms;
    const auto errors = validate(cfg);
    if (!errors.empty()) throw ValidationError(errors);
    SweepReport rep;
    rep.p_norms = p_norms;
    rep.rows.resize(gammas.size());
    parallel_for(gammas.size(), jobs, [&](std::size_t i) {
        const RunConfig c = with_gamma(cfg, gammas[i]);
        try {
            rep.rows[i] = sweep_row(c, simulate(c));
        } catch (const Error& e) {
            SweepRow row;
            row.gamma = gammas[i];
            const double nan = std::numeric_limits<double>::quiet_NaN();
            row.excess_l1 = row.excess_l2 = row.excess_l4 = nan;
            row.excess_p.assign(p_norms.size(), nan);
            row.pressure_l1 = row.complementarity = row.congestion_fraction = row.max_rho = nan;
            row.status = std::string(to_string(e.code()));
            rep.rows[i] = row;
        }
    });
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        for (std::size_t k = 0; k < p_norms.size(); ++k) {
            DecayRow d;
            d.gamma_lo = rep.rows[i - 1].gamma;
            d.gamma_hi = rep.rows[i].gamma;
            d.p = p_norms[k];
            const double lo = rep.rows[i - 1].excess_p[k], hi = rep.rows[i].excess_p[k];
            d.ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::quiet_NaN();
            d.bound_ratio = std::pow(d.gamma_lo / d.gamma_hi, (d.p - 1.0) / d.p);
            rep.decay.push_back(d);
        }
    return rep;
}

inline void write_sweep(const SweepReport& rep, const std::string& out_dir) {
    ensure_directory(out_dir);
    std::string t = join_columns(sweep_columns()) + "\n";
    for (const auto& r : rep.rows) {
        for (double v : {r.gamma, r.excess_l1, r.excess_l2, r.excess_l4, r.pressure_l1, r.complementarity,
                         r.congestion_fraction, r.max_rho})
            t += format_double(v) + ",";
        t += r.status + "\n";
    }
    write_text(out_dir + "/sweep.csv", t);
    std::string d = "gamma_lo,gamma_hi,p,ratio,bound_ratio\n";
    for (const auto& r : rep.decay)
        d += format_double(r.gamma_lo) + "," + format_double(r.gamma_hi) + "," + format_double(r.p) + "," +
             format_double(r.ratio) + "," + format_double(r.bound_ratio) + "\n";
    write_text(out_dir + "/sweep_decay.csv", d);
}

}  // namespace fenecongest
