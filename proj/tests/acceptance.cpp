// Acceptance run: one PASS/FAIL line per criterion, exit 0 only if all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "fenecongest/run.hpp"

using namespace fenecongest;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

std::string config_path(const char* name) { return std::string(FC_CONFIG_DIR) + "/" + name; }

double sum_h(const std::vector<double>& v, double h) {
    double s = 0.0;
    for (double x : v) s += x * h;
    return s;
}

double rel_drift(double now, double start) { return std::abs(now - start) / std::abs(start); }

Outcome normalization() {
    const double b = 4.0;
    double worst_norm = 0.0, worst_second = 0.0;
    for (int n : {16, 24, 32, 64}) {
        const auto quad = build_quadrature(n, b);
        double zero = 0.0, second = 0.0;
        for (std::size_t m = 0; m < quad.size(); ++m) {
            const double M = partial_maxwellian(quad.node(m), b);
            const double q = quad.nodes[m];
            zero += quad.weights[m] * M;
            second += quad.weights[m] * M * q * q;
        }
        worst_norm = std::max(worst_norm, std::abs(zero - 1.0));
        worst_second = std::max(worst_second, std::abs(second - 4.0 / 7.0));
    }
    return {worst_norm <= 1e-12 && worst_second <= 1e-10,
            fmt("max |int M - 1| = %.3g, max |int q^2 M - 4/7| = %.3g over n = 16..64", worst_norm, worst_second)};
}

Outcome certification() {
    std::string d;
    bool ok = true;
    for (double b : {2.5, 4.0, 8.0, 1.5, 2.0}) {
        const bool expect = b > 2.0;
        const auto cert = certify_potential(b);
        ok = ok && cert.passed == expect;
        d += fmt("b=%g:", b) + (cert.passed ? "pass " : "fail ");
    }
    return {ok, d};
}

Outcome equilibrium() {
    const Grid1D g{64, 1.0, Boundary::Periodic};
    const KineticSolver ks(g, make_spring_model({4.0}, 32), KineticParams{});
    const auto one = ks.uniform(1.0);
    const std::vector<double> u(64, 0.0);
    const auto rhs = ks.fp_rhs(one, u);
    double r = 0.0;
    for (double v : rhs.values) r = std::max(r, std::abs(v));
    double s = 0.0;
    const double dt = ks.max_stable_dt(u);
    for (double step : {dt, 0.1 * dt, 1e-6}) {
        const auto next = ks.fp_step(one, u, step);
        for (double v : next.values) s = std::max(s, std::abs(v - 1.0));
    }
    return {r <= 1e-12 && s <= 1e-13, fmt("|fp_rhs|_inf = %.3g, |fp_step - 1|_inf = %.3g", r, s)};
}

Outcome conservation() {
    RunConfig c = load_config(config_path("perturbed.ini"));
    c.grid.nx = 128;
    c.nq = 32;
    c.K = 1;
    c.b = {4.0};
    c.fluid.pressure_law.gamma = 10.0;
    c.fluid.force.kind = ForceKind::None;
    double worst_mass = 0.0, worst_mom = 0.0;
    for (auto boundary : {Boundary::Periodic, Boundary::Walls}) {
        c.grid.boundary = boundary;
        const auto cs = build_solver(c);
        auto s = initial_state(c, cs);
        const double h = cs.grid().h();
        const double m_rho = sum_h(s.fluid.rho, h), m_psi = cs.kinetic().total_mass(s.psi_hat),
                     m_eta = sum_h(s.eta_direct, h), mom0 = fluid_momentum(s.fluid, cs.grid());
        // momentum drift is measured against the initial scale int rho |u|
        double scale = std::abs(mom0);
        for (int j = 0; j < cs.grid().nx; ++j) scale += s.fluid.rho[j] * std::abs(s.fluid.u[j]) * h;
        for (int k = 0; k < 1000; ++k) s = cs.step(s, cs.stable_dt(s));
        worst_mass = std::max({worst_mass, rel_drift(sum_h(s.fluid.rho, h), m_rho),
                               rel_drift(cs.kinetic().total_mass(s.psi_hat), m_psi),
                               rel_drift(sum_h(s.eta_direct, h), m_eta)});
        if (boundary == Boundary::Periodic) worst_mom = std::abs(fluid_momentum(s.fluid, cs.grid()) - mom0) / scale;
    }
    return {worst_mass <= 1e-10 && worst_mom <= 1e-10,
            fmt("max mass drift = %.3g (rho, psi, eta; periodic and walls), momentum drift = %.3g", worst_mass,
                worst_mom)};
}

Outcome kramers() {
    double worst_c = 0.0, worst_tau = 0.0;
    for (double b : {2.5, 4.0, 8.0})
        for (int n : {16, 32}) {
            const auto model = make_spring_model({b}, n);
            const ConfigDistribution one(8, model.n_config(), 1.0);
            for (double c : kramers_moment(one, model, 0)) worst_c = std::max(worst_c, std::abs(c - 1.0));
            StressParams p;
            p.k = 1.0;
            const auto st = extra_stress(one, model, p);
            for (std::size_t j = 0; j < 8; ++j) worst_tau = std::max(worst_tau, std::abs(st.tau1_at(j) + 1.0));
        }
    return {worst_c <= 1e-8 && worst_tau <= 1e-8,
            fmt("|C1(M) - I| = %.3g, |tau1 + I| = %.3g", worst_c, worst_tau)};
}

Outcome energy() {
    const RunConfig c = load_config(config_path("perturbed.ini"));
    const auto cs = build_solver(c);
    auto run = [&](bool inject) {
        auto s = initial_state(c, cs);
        std::vector<EnergyBreakdown> hist{energy_breakdown(s, cs)};
        for (int k = 0; k < 200; ++k) {
            if (inject && k == 99)
                for (double& x : s.fluid.u) x *= 1.1;
            s = cs.step(s, cs.stable_dt(s));
            hist.push_back(energy_breakdown(s, cs));
        }
        return std::make_pair(check_energy_inequality(hist, c.energy_c), hist);
    };
    const auto [good, hist] = run(false);
    const auto [bad, bad_hist] = run(true);
    const double e0 = hist.front().functional(), eT = hist.back().functional();
    const bool ok = good.passed && eT <= e0 && !bad.passed && bad.worst_step == 100;
    return {ok, fmt("C = %g, worst ratio %.3g; E(T) - E(0) = %.3g; injected run fails at step %g", c.energy_c,
                    good.worst_ratio, eT - e0, static_cast<double>(bad.worst_step))};
}

Outcome eta_consistency() {
    const RunConfig base = load_config(config_path("perturbed.ini"));
    std::vector<double> gaps;
    for (int n : {32, 64, 128, 256}) {
        RunConfig c = base;
        c.grid.nx = n;
        const auto r = simulate(c);
        gaps.push_back(r.rows.back().eta_consistency_l1);
    }
    bool ok = true;
    std::string d = "gaps";
    for (double g : gaps) d += fmt(" %.4g", g);
    d += ", ratios";
    for (std::size_t i = 1; i < gaps.size(); ++i) {
        const double ratio = gaps[i - 1] / gaps[i];
        ok = ok && ratio >= 1.5 && ratio <= 2.5;
        d += fmt(" %.3f", ratio);
    }
    return {ok, d + " (N = 32..256)"};
}

Outcome free_boundary() {
    const RunConfig c = load_config(config_path("compression.ini"));
    const auto rep = gamma_sweep(c, {5, 10, 20, 40, 80}, c.p_norms, c.sweep_parallel ? 5 : 1);
    bool ok = true, decreasing = true, comp = true;
    double pmax = 0.0, pmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        ok = ok && r.status == "ok";
        if (i > 0) {
            decreasing = decreasing && r.excess_l2 < rep.rows[i - 1].excess_l2;
            comp = comp && r.complementarity < rep.rows[i - 1].complementarity;
            pmax = std::max(pmax, r.pressure_l1);
            pmin = std::min(pmin, r.pressure_l1);
        }
    }
    const double shrink = rep.rows.back().excess_l2 / rep.rows.front().excess_l2;
    ok = ok && decreasing && comp && shrink <= 0.1 && pmax / pmin <= 10.0;
    std::string d = "excess_l2";
    for (const auto& r : rep.rows) d += fmt(" %.4g", r.excess_l2);
    d += fmt("; final/first %.3f, pressure_l1 max/min %.3f", shrink, pmax / pmin);
    d += std::string("; complementarity ") + (comp ? "decreasing" : "not decreasing");
    return {ok, d};
}

Outcome determinism() {
    RunConfig c = load_config(config_path("perturbed.ini"));
    const auto root = fs::temp_directory_path() / "fenecongest_acceptance";
    fs::remove_all(root);
    auto run = [&](int threads, const std::string& name) {
        c.threads = threads;
        const std::string dir = (root / name).string();
        simulate(c, dir);
        return dir + "/diagnostics.csv";
    };
    const auto a = run(1, "a"), b = run(1, "b"), t4 = run(4, "t4");
    const bool same = read_text(a) == read_text(b);
    const auto ta = read_csv(a, &diagnostics_columns()), tb = read_csv(t4, &diagnostics_columns());
    double worst = ta.rows.size() == tb.rows.size() ? 0.0 : std::numeric_limits<double>::infinity();
    if (std::isfinite(worst))
        for (const auto& col : diagnostics_columns()) {
            double scale = 0.0, diff = 0.0;
            for (std::size_t i = 0; i < ta.rows.size(); ++i) {
                scale = std::max(scale, std::abs(ta.number(i, col)));
                diff = std::max(diff, std::abs(ta.number(i, col) - tb.number(i, col)));
            }
            if (scale > 0.0) worst = std::max(worst, diff / scale);
        }
    fs::remove_all(root);
    return {same && worst <= 1e-12,
            std::string(same ? "repeat runs byte-identical" : "repeat runs differ") +
                fmt("; threads 1 vs 4 max column-relative difference %.3g", worst)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> checks{
        {"maxwellian_normalization", normalization},
        {"hypothesis_certification", certification},
        {"equilibrium_fixed_point", equilibrium},
        {"conservation", conservation},
        {"kramers_identity", kramers},
        {"energy_inequality", energy},
        {"eta_consistency", eta_consistency},
        {"free_boundary_sweep", free_boundary},
        {"determinism", determinism},
    };
    int failed = 0;
    for (const auto& [name, check] : checks) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(checks.size()) - failed, checks.size());
    return failed == 0 ? 0 : 1;
}
