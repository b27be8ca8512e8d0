#pragma once

// Energy functional, dissipation integrals and the discrete energy inequality.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "fenecongest/coupled.hpp"

namespace fenecongest {

/// F(s) = s (log s - 1) + 1, with F(0) = 1.
inline double entropy(double s) {
    if (s < 0.0) throw Error(ErrorCode::NegativeInput, "relative entropy needs s >= 0");
    if (s == 0.0) return 1.0;
    return s * (std::log(s) - 1.0) + 1.0;
}

struct EnergyBreakdown {
    double time = 0.0;
    long step = 0;
    double kinetic = 0.0;
    double pressure_energy = 0.0;  ///< int P(rho), P(s) = s^gamma / (gamma - 1)
    double eta_sq = 0.0;
    double eta_entropy = 0.0;
    double psi_entropy = 0.0;
    double diss_shear = 0.0;
    double diss_bulk = 0.0;
    double diss_eta_grad = 0.0;
    double diss_eta_fisher = 0.0;
    double diss_psi_x = 0.0;
    double diss_psi_q = 0.0;
    double work = 0.0;
    double c_eta = 0.0;              ///< trace coefficient l as configured
    double eta_entropy_coeff = 0.0;  ///< k (l - (K + 1))
    double total = 0.0;              ///< kinetic + eta_sq + eta_entropy + psi_entropy

    /// The functional monitored at finite gamma: total plus int P(rho).
    double functional() const { return total + pressure_energy; }
    double dissipation() const {
        return diss_shear + diss_bulk + diss_eta_grad + diss_eta_fisher + diss_psi_x + diss_psi_q;
    }
    /// Sum of term magnitudes, used to scale rounding slack.
    double magnitude() const {
        return std::abs(kinetic) + std::abs(pressure_energy) + std::abs(eta_sq) + std::abs(eta_entropy) +
               std::abs(psi_entropy);
    }
};

inline EnergyBreakdown energy_breakdown(const SystemState& s, const CoupledSolver& solver) {
    if (!all_finite(s)) throw Error(ErrorCode::NonFinite, "energy breakdown of a non-finite state");
    const Grid1D& g = solver.grid();
    const auto& kin = solver.kinetic();
    const auto& cg = kin.config();
    const FluidParams& fp = solver.fluid();
    const StressParams& sp = solver.stress();
    const int K = solver.model().K;
    const double h = g.h();
    const double eps = kin.params().epsilon;
    const std::size_t nc = cg.size();

    EnergyBreakdown e;
    e.time = s.time;
    e.step = s.step_index;
    e.c_eta = sp.trace_coefficient(K);
    e.eta_entropy_coeff = sp.k * (e.c_eta - (K + 1.0));
    const auto eta = polymer_density(s.psi_hat, solver.model());

    std::vector<double> sq(nc);
    for (int j = 0; j < g.nx; ++j) {
        e.pressure_energy += fp.pressure_law.potential(s.fluid.rho[j], j) * h;
        e.eta_sq += sp.xi * eta[j] * eta[j] * h;
        e.eta_entropy += e.eta_entropy_coeff * entropy(std::max(eta[j], 0.0)) * h;
        const auto row = s.psi_hat.row(j);
        double ent = 0.0;
        for (std::size_t m = 0; m < nc; ++m) {
            ent += cg.mass[m] * entropy(std::max(row[m], 0.0));
            sq[m] = std::sqrt(std::max(row[m], 0.0));
        }
        e.psi_entropy += sp.k * ent * h;
        e.diss_psi_q += 4.0 * sp.k * kin.q_dirichlet(sq) * h;
        const double div = g.divergence(s.fluid.u, j);
        // D(u) - (div u) I / d vanishes in one space dimension, so diss_shear stays 0
        e.diss_bulk += fp.mu_b * div * div * h;
        if (g.active_face(j)) {
            const int r = g.right_cell(j);
            const double rho_f = face_density(s.fluid.rho, g, j);
            e.kinetic += 0.5 * rho_f * s.fluid.u[j] * s.fluid.u[j] * h;
            e.work += rho_f * fp.force(g.face(j), s.time) * s.fluid.u[j] * h;
            const double de = (eta[r] - eta[j]) / h;
            e.diss_eta_grad += 2.0 * eps * sp.xi * de * de * h;
            const double ds = (std::sqrt(std::max(eta[r], 0.0)) - std::sqrt(std::max(eta[j], 0.0))) / h;
            e.diss_eta_fisher += 4.0 * eps * e.eta_entropy_coeff * ds * ds * h;
            double fx = 0.0;
            const auto rr = s.psi_hat.row(r);
            for (std::size_t m = 0; m < nc; ++m) {
                const double d = (std::sqrt(std::max(rr[m], 0.0)) - sq[m]) / h;
                fx += cg.mass[m] * d * d;
            }
            e.diss_psi_x += 4.0 * sp.k * eps * fx * h;
        }
    }
    e.total = e.kinetic + e.eta_sq + e.eta_entropy + e.psi_entropy;
    return e;
}

struct EnergyVerdict {
    bool passed = true;      ///< every step within tolerance
    bool run_passed = true;  ///< E(T) <= E(0) + int work
    long worst_step = -1;    ///< step index of the state after the worst step
    double worst_excess = -std::numeric_limits<double>::infinity();  ///< max of lhs - tolerance
    double worst_ratio = 0.0;  ///< max of lhs / dt^2 over steps with lhs > 0
};

/// Checks E^{n+1} - E^n + dt (D - W) <= C dt^2 + slack per step, where D and W
/// are averaged over the two end states, and the whole-run balance.
inline EnergyVerdict check_energy_inequality(const std::vector<EnergyBreakdown>& history, double C) {
    EnergyVerdict v;
    if (history.size() < 2) {
        v.worst_excess = 0.0;
        return v;
    }
    double work = 0.0;
    for (std::size_t n = 0; n + 1 < history.size(); ++n) {
        const auto& a = history[n];
        const auto& b = history[n + 1];
        const double dt = b.time - a.time;
        const double D = 0.5 * (a.dissipation() + b.dissipation());
        const double W = 0.5 * (a.work + b.work);
        work += dt * W;
        const double lhs = b.functional() - a.functional() + dt * (D - W);
        const double slack = 10.0 * std::numeric_limits<double>::epsilon() * (a.magnitude() + b.magnitude());
        const double excess = lhs - (C * dt * dt + slack);
        if (excess > v.worst_excess) {
            v.worst_excess = excess;
            v.worst_step = b.step;
        }
        if (lhs > 0.0 && dt > 0.0) v.worst_ratio = std::max(v.worst_ratio, lhs / (dt * dt));
        if (excess > 0.0) v.passed = false;
    }
    const double slack =
        10.0 * std::numeric_limits<double>::epsilon() * (history.front().magnitude() + history.back().magnitude());
    v.run_passed = history.back().functional() <= history.front().functional() + work + slack;
    return v;
}

}  // namespace fenecongest
