#pragma once

// Compressible isentropic Navier–Stokes on the staggered 1D grid: density at
// cell centres, velocity at faces. Upwind primal mass fluxes, upwind momentum
// convection with the dual mass fluxes, implicit viscosity.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fenecongest/grid.hpp"

namespace fenecongest {

enum class PressureKind { Power, Congestion, General };

/// power: rho^gamma; congestion: (rho / rho*(x))^gamma; general: a rho^g + rho^gamma.
struct PressureLaw {
    PressureKind kind = PressureKind::Power;
    double gamma = 10.0;
    std::vector<double> threshold;  ///< rho* per cell; empty means 1
    double general_a = 0.0;
    double general_exponent = 2.0;

    double rho_star(std::size_t j) const { return threshold.empty() ? 1.0 : threshold[j]; }

    double operator()(double rho, std::size_t j = 0) const {
        switch (kind) {
            case PressureKind::Power: return std::pow(rho, gamma);
            case PressureKind::Congestion: return std::pow(rho / rho_star(j), gamma);
            case PressureKind::General: return general_a * std::pow(rho, general_exponent) + std::pow(rho, gamma);
        }
        return 0.0;
    }
    /// dp/drho
    double derivative(double rho, std::size_t j = 0) const {
        if (rho <= 0.0) return 0.0;
        switch (kind) {
            case PressureKind::Power: return gamma * std::pow(rho, gamma - 1.0);
            case PressureKind::Congestion: {
                const double s = rho_star(j);
                return gamma / s * std::pow(rho / s, gamma - 1.0);
            }
            case PressureKind::General:
                return general_a * general_exponent * std::pow(rho, general_exponent - 1.0) +
                       gamma * std::pow(rho, gamma - 1.0);
        }
        return 0.0;
    }
    /// Pressure potential P with rho P' - P = p and P(0) = 0.
    double potential(double rho, std::size_t j = 0) const {
        switch (kind) {
            case PressureKind::Power: return std::pow(rho, gamma) / (gamma - 1.0);
            case PressureKind::Congestion: {
                const double s = rho_star(j);
                return std::pow(rho / s, gamma) / (gamma - 1.0);
            }
            case PressureKind::General:
                return general_a * std::pow(rho, general_exponent) / (general_exponent - 1.0) +
                       std::pow(rho, gamma) / (gamma - 1.0);
        }
        return 0.0;
    }
    /// P'(rho), the enthalpy used by the well-balanced gradient.
    double enthalpy(double rho, std::size_t j = 0) const {
        if (rho <= 0.0) return 0.0;
        switch (kind) {
            case PressureKind::Power: return gamma / (gamma - 1.0) * std::pow(rho, gamma - 1.0);
            case PressureKind::Congestion: {
                const double s = rho_star(j);
                return gamma / ((gamma - 1.0) * s) * std::pow(rho / s, gamma - 1.0);
            }
            case PressureKind::General:
                return general_a * general_exponent / (general_exponent - 1.0) * std::pow(rho, general_exponent - 1.0) +
                       gamma / (gamma - 1.0) * std::pow(rho, gamma - 1.0);
        }
        return 0.0;
    }
};

inline std::vector<double> pressure(std::span<const double> rho, const PressureLaw& law) {
    std::vector<double> p(rho.size());
    for (std::size_t j = 0; j < rho.size(); ++j) p[j] = law(rho[j], j);
    return p;
}

enum class ForceKind { None, Constant, Sinusoidal, Inward };

/// Closed-form body force presets f(x, t).
struct BodyForce {
    ForceKind kind = ForceKind::None;
    double amplitude = 0.0;
    double wavenumber = 1.0;  ///< sinusoidal: amplitude sin(2 pi k x / length)
    double center = 0.5;      ///< inward: -amplitude sin(pi (x - c) / r) on |x - c| < r
    double radius = 0.25;
    double length = 1.0;

    double operator()(double x, double /*t*/ = 0.0) const {
        switch (kind) {
            case ForceKind::None: return 0.0;
            case ForceKind::Constant: return amplitude;
            case ForceKind::Sinusoidal: return amplitude * std::sin(2.0 * std::numbers::pi * wavenumber * x / length);
            case ForceKind::Inward: {
                const double s = x - center;
                if (std::abs(s) >= radius) return 0.0;
                return -amplitude * std::sin(std::numbers::pi * s / radius);
            }
        }
        return 0.0;
    }
    bool is_zero() const { return kind == ForceKind::None || amplitude == 0.0; }
};

struct FluidParams {
    double mu_s = 1.0;
    double mu_b = 0.1;
    double xi = 1.0;  ///< coefficient of the xi eta^2 term grouped with the pressure
    PressureLaw pressure_law;
    BodyForce force;
    bool well_balanced = false;
    double vacuum_floor = 1e-10;
    double cfl = 0.4;
};

struct FluidState {
    std::vector<double> rho;  ///< cells
    std::vector<double> u;    ///< faces; u[j] on the right face of cell j
};

inline void validate_fluid_params(const FluidParams& p) {
    if (!(p.mu_s > 0.0)) throw Error(ErrorCode::InvalidArgument, "shear viscosity mu_s must be > 0");
    if (!(p.mu_b >= 0.0)) throw Error(ErrorCode::InvalidArgument, "bulk viscosity mu_b must be >= 0");
    if (!(p.pressure_law.gamma > 1.5)) throw Error(ErrorCode::InvalidArgument, "gamma must exceed 3/2");
    if (p.pressure_law.kind == PressureKind::General && !(p.pressure_law.general_exponent > 1.0))
        throw Error(ErrorCode::InvalidArgument, "general pressure exponent must exceed 1");
    for (double s : p.pressure_law.threshold)
        if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "congestion threshold rho* must be > 0");
    if (!(p.cfl > 0.0 && p.cfl <= 1.0)) throw Error(ErrorCode::InvalidArgument, "CFL number must lie in (0, 1]");
}

/// Newtonian stress mu_s [D(u) - (1/d) div u I] + mu_b div u I from a d x d velocity gradient.
inline Eigen::MatrixXd newtonian_stress(const Eigen::MatrixXd& grad_u, double mu_s, double mu_b) {
    const auto d = grad_u.rows();
    const Eigen::MatrixXd D = 0.5 * (grad_u + grad_u.transpose());
    const double div = grad_u.trace();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
    return mu_s * (D - (div / static_cast<double>(d)) * I) + mu_b * div * I;
}

/// Cell values of the viscous stress; in one dimension S = mu_b u_x.
inline std::vector<double> viscous_stress(std::span<const double> u, const Grid1D& grid, const FluidParams& params) {
    std::vector<double> S(grid.nx);
    for (int j = 0; j < grid.nx; ++j) {
        Eigen::MatrixXd g(1, 1);
        g(0, 0) = grid.divergence(u, j);
        S[j] = newtonian_stress(g, params.mu_s, params.mu_b)(0, 0);
    }
    return S;
}

inline void check_fluid_grid(const Grid1D& grid, std::span<const double> rho, std::span<const double> u) {
    if (rho.size() != static_cast<std::size_t>(grid.nx) || u.size() != static_cast<std::size_t>(grid.nx))
        throw Error(ErrorCode::GridMismatch, "fluid fields do not match the grid");
}

/// Upwind mass flux on every face (zero on wall faces).
inline std::vector<double> mass_fluxes(std::span<const double> rho, std::span<const double> u, const Grid1D& grid) {
    std::vector<double> F(grid.nx, 0.0);
    for (int j = 0; j < grid.nx; ++j) {
        if (!grid.active_face(j)) continue;
        const int r = grid.right_cell(j);
        F[j] = u[j] >= 0.0 ? u[j] * rho[j] : u[j] * rho[r];
    }
    return F;
}

/// Mass on face j: the average of the two adjacent cells.
inline double face_density(std::span<const double> rho, const Grid1D& grid, int j) {
    const int r = grid.right_cell(j);
    return r < 0 ? 0.5 * rho[j] : 0.5 * (rho[j] + rho[r]);
}

/// Acoustic time step CFL h / max(|u| + sqrt(p'(rho) + extra)), where `extra`
/// (optional, per cell) adds squared wave speeds from other pressure-like terms.
inline double fluid_dt(const FluidState& s, const Grid1D& grid, const FluidParams& params,
                       std::span<const double> extra_sound2 = {}) {
    double speed = 0.0;
    for (int j = 0; j < grid.nx; ++j) {
        double c2 = std::max(params.pressure_law.derivative(s.rho[j], j), 0.0);
        if (!extra_sound2.empty()) c2 += std::max(extra_sound2[j], 0.0);
        const double ur = std::abs(grid.right_face_velocity(s.u, j)), ul = std::abs(grid.left_face_velocity(s.u, j));
        speed = std::max(speed, std::max(ur, ul) + std::sqrt(c2));
    }
    return speed > 0.0 ? params.cfl * grid.h() / speed : std::numeric_limits<double>::infinity();
}

inline std::vector<double> continuity_step(std::span<const double> rho, std::span<const double> u, double dt,
                                           const Grid1D& grid) {
    check_fluid_grid(grid, rho, u);
    for (double r : rho)
        if (!(r >= 0.0)) throw Error(ErrorCode::NegativeInput, "density must be nonnegative");
    const double h = grid.h();
    for (int j = 0; j < grid.nx; ++j) {
        const double out = std::max(grid.right_face_velocity(u, j), 0.0) + std::max(-grid.left_face_velocity(u, j), 0.0);
        if (dt * out > h * (1.0 + 1e-12))
            throw Error(ErrorCode::CflViolation, "continuity step violates the upwind CFL limit at cell " + std::to_string(j));
    }
    const auto F = mass_fluxes(rho, u, grid);
    std::vector<double> next(rho.begin(), rho.end());
    for (int j = 0; j < grid.nx; ++j) {
        const double right = grid.active_face(j) ? F[j] : 0.0;
        const int jl = grid.left_cell(j);
        const double left = jl < 0 ? 0.0 : F[jl];
        next[j] -= dt * (right - left) / h;
        if (next[j] < 0.0) next[j] = 0.0;  // roundoff at vacuum only
    }
    return next;
}

/// Terms of the momentum update for face j that do not involve u^{n+1}.
struct MomentumTerms {
    std::vector<double> convection, pressure_gradient, polymer_divergence, force;
};

/// u^{n+1} from the momentum balance
///   (rho_f^{n+1} u - rho_f^n u^n)/dt + convection + grad(p(rho^{n+1}) + xi eta^2)
///     = d_x(mu_b u_x) + rho_f^{n+1} f + d_x tau1,
/// with the viscous term implicit. rho_new must come from continuity_step(rho, u).
inline std::vector<double> momentum_step(const FluidState& s, std::span<const double> rho_new,
                                         std::span<const double> eta, std::span<const double> tau1, double dt,
                                         const FluidParams& params, const Grid1D& grid, double time = 0.0,
                                         MomentumTerms* terms = nullptr) {
    check_fluid_grid(grid, s.rho, s.u);
    const int nx = grid.nx;
    if (rho_new.size() != static_cast<std::size_t>(nx) || eta.size() != static_cast<std::size_t>(nx) ||
        tau1.size() != static_cast<std::size_t>(nx))
        throw Error(ErrorCode::GridMismatch, "momentum inputs do not match the grid");
    const double h = grid.h();
    const auto F = mass_fluxes(s.rho, s.u, grid);
    // dual fluxes at cell centres and the upwind face velocity they carry
    std::vector<double> G(nx), Gu(nx);
    for (int j = 0; j < nx; ++j) {
        const int jl = grid.left_cell(j);
        const double fl = jl < 0 ? 0.0 : F[jl];
        const double fr = grid.active_face(j) ? F[j] : 0.0;
        G[j] = 0.5 * (fl + fr);
        const double up = G[j] >= 0.0 ? grid.left_face_velocity(s.u, j) : grid.right_face_velocity(s.u, j);
        Gu[j] = G[j] * up;
    }
    std::vector<double> Pi(nx);
    for (int j = 0; j < nx; ++j) Pi[j] = params.pressure_law(rho_new[j], j) + params.xi * eta[j] * eta[j];

    const std::vector<int> faces = [&] {
        std::vector<int> f;
        for (int j = 0; j < nx; ++j)
            if (grid.active_face(j)) f.push_back(j);
        return f;
    }();
    const std::size_t n = faces.size();
    std::vector<double> rhs(n), diag(n), sub(n, 0.0), sup(n, 0.0);
    if (terms) {
        terms->convection.assign(nx, 0.0);
        terms->pressure_gradient.assign(nx, 0.0);
        terms->polymer_divergence.assign(nx, 0.0);
        terms->force.assign(nx, 0.0);
    }
    const double visc = dt * params.mu_b / (h * h);
    std::vector<bool> vacuum(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const int j = faces[i];
        const int r = grid.right_cell(j);
        const double rho_f_old = face_density(s.rho, grid, j);
        const double rho_f = face_density(rho_new, grid, j);
        const double conv = (Gu[r] - Gu[j]) / h;
        double grad;
        if (params.well_balanced) {
            const double dh = params.pressure_law.enthalpy(rho_new[r], r) - params.pressure_law.enthalpy(rho_new[j], j);
            grad = rho_f * dh / h + params.xi * (eta[r] * eta[r] - eta[j] * eta[j]) / h;
        } else {
            grad = (Pi[r] - Pi[j]) / h;
        }
        const double poly = (tau1[r] - tau1[j]) / h;
        const double force = params.force.is_zero() ? 0.0 : rho_f * params.force(grid.face(j), time);
        if (terms) {
            terms->convection[j] = conv;
            terms->pressure_gradient[j] = grad;
            terms->polymer_divergence[j] = poly;
            terms->force[j] = force;
        }
        rhs[i] = rho_f_old * s.u[j] + dt * (-conv - grad + poly + force);
        diag[i] = rho_f + 2.0 * visc;
        sub[i] = -visc;
        sup[i] = -visc;
        if (rho_f <= params.vacuum_floor) {
            if (std::abs(rhs[i]) > 1e-10)
                throw Error(ErrorCode::VacuumBreakdown,
                            "momentum " + std::to_string(rhs[i]) + " on vacuum face " + std::to_string(j));
            vacuum[i] = true;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!vacuum[i]) continue;
        rhs[i] = 0.0;
        diag[i] = 1.0;
        sub[i] = sup[i] = 0.0;
    }
    if (grid.periodic()) {
        if (visc == 0.0 || n < 3) {
            for (std::size_t i = 0; i < n; ++i) rhs[i] /= diag[i];
        } else {
            solve_cyclic_tridiagonal(sub, diag, sup, rhs);
        }
    } else {
        // wall faces carry u = 0, so the ends are Dirichlet
        if (n > 0) {
            sub[0] = 0.0;
            sup[n - 1] = 0.0;
        }
        solve_tridiagonal(sub, diag, sup, rhs);
    }
    std::vector<double> u(nx, 0.0);
    for (std::size_t i = 0; i < n; ++i) u[faces[i]] = vacuum[i] ? 0.0 : rhs[i];
    require_finite(u, "velocity");
    return u;
}

/// Continuity then momentum with frozen eta and tau1.
inline FluidState fluid_step(const FluidState& s, std::span<const double> eta, std::span<const double> tau1, double dt,
                             const FluidParams& params, const Grid1D& grid, double time = 0.0) {
    FluidState next;
    next.rho = continuity_step(s.rho, s.u, dt, grid);
    next.u = momentum_step(s, next.rho, eta, tau1, dt, params, grid, time);
    return next;
}

inline double fluid_mass(const FluidState& s, const Grid1D& grid) {
    double m = 0.0;
    for (double r : s.rho) m += r;
    return m * grid.h();
}

/// sum_f rho_f u_f h over active faces.
inline double fluid_momentum(const FluidState& s, const Grid1D& grid) {
    double m = 0.0;
    for (int j = 0; j < grid.nx; ++j)
        if (grid.active_face(j)) m += face_density(s.rho, grid, j) * s.u[j];
    return m * grid.h();
}

}  // namespace fenecongest
