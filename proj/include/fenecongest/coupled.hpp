#pragma once

// One step of the coupled system: stress from psi_hat, fluid (continuity +
// momentum), kinetic with the new velocity, and the direct eta equation.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "fenecongest/fluid.hpp"
#include "fenecongest/kinetic.hpp"
#include "fenecongest/stress.hpp"

namespace fenecongest {

inline double minmod(double a, double b) {
    if (a * b <= 0.0) return 0.0;
    return std::abs(a) < std::abs(b) ? a : b;
}

namespace detail {

// -d_x(eta u) with MUSCL-minmod face states.
inline void muscl_advection(std::span<const double> eta, std::span<const double> u, const Grid1D& grid,
                            std::span<double> out) {
    const int nx = grid.nx;
    auto value = [&](int j) { return eta[static_cast<std::size_t>(j)]; };
    auto slope = [&](int j) {
        const int l = grid.left_cell(j), r = grid.right_cell(j);
        if (l < 0 || r < 0) return 0.0;
        return minmod(value(j) - value(l), value(r) - value(j));
    };
    std::vector<double> flux(nx, 0.0);
    for (int j = 0; j < nx; ++j) {
        if (!grid.active_face(j)) continue;
        const int r = grid.right_cell(j);
        const double face = u[j] >= 0.0 ? value(j) + 0.5 * slope(j) : value(r) - 0.5 * slope(r);
        flux[j] = u[j] * face;
    }
    for (int j = 0; j < nx; ++j) {
        const int l = grid.left_cell(j);
        const double right = grid.active_face(j) ? flux[j] : 0.0;
        const double left = l < 0 ? 0.0 : flux[l];
        out[j] = -(right - left) / grid.h();
    }
}

}  // namespace detail

/// d_t eta + d_x(eta u) - eps d_xx(eta / zeta) = 0 with zeta = 1: MUSCL-minmod
/// advection by SSP-RK2, then backward-Euler diffusion. rho enters only through
/// zeta(rho), which is fixed to 1.
inline std::vector<double> eta_step(std::span<const double> eta, std::span<const double> rho,
                                    std::span<const double> u, double dt, double epsilon, const Grid1D& grid) {
    const int nx = grid.nx;
    if (eta.size() != static_cast<std::size_t>(nx) || u.size() != static_cast<std::size_t>(nx) ||
        rho.size() != static_cast<std::size_t>(nx))
        throw Error(ErrorCode::GridMismatch, "eta_step inputs do not match the grid");
    if (dt == 0.0) return {eta.begin(), eta.end()};
    double umax = 0.0;
    for (int j = 0; j < nx; ++j) umax = std::max(umax, std::abs(grid.right_face_velocity(u, j)));
    if (dt * umax > 0.5 * grid.h() * (1.0 + 1e-12))
        throw Error(ErrorCode::CflViolation, "eta_step exceeds the MUSCL CFL limit 1/2");
    std::vector<double> k(nx), stage(nx), next(nx);
    detail::muscl_advection(eta, u, grid, k);
    for (int j = 0; j < nx; ++j) stage[j] = eta[j] + dt * k[j];
    detail::muscl_advection(stage, u, grid, k);
    for (int j = 0; j < nx; ++j) next[j] = 0.5 * eta[j] + 0.5 * (stage[j] + dt * k[j]);
    solve_implicit_diffusion(next, dt * epsilon / (grid.h() * grid.h()), grid.periodic());
    return next;
}

enum class Splitting { Lie, Strang };

struct SystemState {
    FluidState fluid;
    ConfigDistribution psi_hat;
    std::vector<double> eta_direct;
    double time = 0.0;
    long step_index = 0;
};

struct StepReport {
    int kinetic_substeps = 0;
    std::size_t clipped_nodes = 0;
    double mass_correction = 0.0;
};

inline bool all_finite(const SystemState& s) {
    auto ok = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    return ok(s.fluid.rho) && ok(s.fluid.u) && ok(s.psi_hat.values) && ok(s.eta_direct);
}

class CoupledSolver {
public:
    CoupledSolver(KineticSolver kinetic, FluidParams fluid, StressParams stress, Splitting splitting = Splitting::Lie,
                  int threads = 1)
        : kinetic_(std::move(kinetic)), fluid_(std::move(fluid)), stress_(stress), splitting_(splitting),
          threads_(threads) {
        validate_fluid_params(fluid_);
        if (!(stress_.k > 0.0)) throw Error(ErrorCode::InvalidArgument, "Kramers coefficient k must be > 0");
        if (!(stress_.xi > 0.0)) throw Error(ErrorCode::InvalidArgument, "interaction coefficient xi must be > 0");
        fluid_.xi = stress_.xi;
    }

    const Grid1D& grid() const { return kinetic_.grid(); }
    const KineticSolver& kinetic() const { return kinetic_; }
    const FluidParams& fluid() const { return fluid_; }
    const StressParams& stress() const { return stress_; }
    const SpringModel& model() const { return kinetic_.model(); }
    Splitting splitting() const { return splitting_; }
    int threads() const { return threads_; }
    void set_threads(int t) { threads_ = t; }

    /// Global step: the fluid CFL with the polymer terms counted as extra
    /// pressure, c^2 += (2 xi eta^2 + |tau1| + k l eta) / rho. The kinetic part
    /// and the eta equation sub-cycle when their own limits are smaller.
    double stable_dt(const SystemState& s) const {
        const auto st = stress_field(s.psi_hat);
        const double l = stress_.trace_coefficient(model().K);
        std::vector<double> extra(st.eta.size());
        for (std::size_t j = 0; j < extra.size(); ++j) {
            const double rho = std::max(s.fluid.rho[j], fluid_.vacuum_floor);
            const double e = st.eta[j];
            extra[j] = (2.0 * stress_.xi * e * e + std::abs(st.tau1[j]) + stress_.k * l * e) / rho;
        }
        return fluid_dt(s.fluid, grid(), fluid_, extra);
    }

    StressField stress_field(const ConfigDistribution& psi_hat) const {
        return extra_stress(psi_hat, model(), stress_);
    }

    SystemState initial_state(std::vector<double> rho, std::vector<double> u, ConfigDistribution psi_hat) const {
        SystemState s;
        s.fluid.rho = std::move(rho);
        s.fluid.u = std::move(u);
        if (!grid().periodic() && !s.fluid.u.empty()) s.fluid.u.back() = 0.0;
        s.psi_hat = std::move(psi_hat);
        s.eta_direct = polymer_density(s.psi_hat, model());
        check(s);
        return s;
    }

    SystemState step(const SystemState& s, double dt, StepReport* report = nullptr) const {
        check(s);
        if (dt < 0.0 || !std::isfinite(dt)) throw Error(ErrorCode::InvalidArgument, "dt must be finite and >= 0");
        if (dt == 0.0) return s;
        StepReport local;
        SystemState next;
        next.time = s.time + dt;
        next.step_index = s.step_index + 1;
        try {
            if (splitting_ == Splitting::Lie) {
                const auto st = stress_field(s.psi_hat);
                next.fluid = fluid_step(s.fluid, st.eta, st.tau1, dt, fluid_, grid(), s.time);
                next.psi_hat = kinetic_advance(s.psi_hat, next.fluid.u, dt, local);
            } else {
                const auto half = kinetic_advance(s.psi_hat, s.fluid.u, 0.5 * dt, local);
                const auto st = stress_field(half);
                next.fluid = fluid_step(s.fluid, st.eta, st.tau1, dt, fluid_, grid(), s.time);
                next.psi_hat = kinetic_advance(half, next.fluid.u, 0.5 * dt, local);
            }
            next.eta_direct = eta_advance(s.eta_direct, next.fluid.rho, next.fluid.u, dt);
        } catch (const Error& e) {
            throw Error(e.code(), std::string("step ") + std::to_string(next.step_index) + ": " + e.what());
        }
        if (!all_finite(next))
            throw Error(ErrorCode::NonFinite, "step " + std::to_string(next.step_index) + " produced non-finite fields");
        if (report) *report = local;
        return next;
    }

private:
    void check(const SystemState& s) const {
        const auto nx = static_cast<std::size_t>(grid().nx);
        if (s.fluid.rho.size() != nx || s.fluid.u.size() != nx || s.eta_direct.size() != nx || s.psi_hat.nx != nx ||
            s.psi_hat.n_config != kinetic_.n_config())
            throw Error(ErrorCode::GridMismatch, "system state fields do not share one grid");
    }

    std::vector<double> eta_advance(const std::vector<double>& eta, std::span<const double> rho,
                                    std::span<const double> u, double dt) const {
        double umax = 0.0;
        for (int j = 0; j < grid().nx; ++j) umax = std::max(umax, std::abs(grid().right_face_velocity(u, j)));
        const double limit = umax > 0.0 ? 0.5 * grid().h() / umax : dt;
        int n = 1;
        if (dt > limit) n = static_cast<int>(std::ceil(dt / limit * (1.0 + 1e-12)));
        std::vector<double> out = eta;
        for (int i = 0; i < n; ++i) out = eta_step(out, rho, u, dt / n, kinetic_.params().epsilon, grid());
        return out;
    }

    ConfigDistribution kinetic_advance(const ConfigDistribution& psi, std::span<const double> u, double dt,
                                       StepReport& report) const {
        const double limit = kinetic_.max_stable_dt(u);
        int n = 1;
        if (dt > limit) n = static_cast<int>(std::ceil(dt / limit * (1.0 + 1e-12)));
        const double sub = dt / n;
        ConfigDistribution out = psi;
        for (int i = 0; i < n; ++i) {
            KineticStepLog log;
            out = kinetic_.fp_step(out, u, sub, &log, threads_);
            report.clipped_nodes += log.clipped_nodes;
            report.mass_correction += log.mass_correction;
        }
        report.kinetic_substeps += n;
        return out;
    }

    KineticSolver kinetic_;
    FluidParams fluid_;
    StressParams stress_;
    Splitting splitting_;
    int threads_;
};

}  // namespace fenecongest
