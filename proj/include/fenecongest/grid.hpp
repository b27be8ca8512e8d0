#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fenecongest/error.hpp"

namespace fenecongest {

enum class Boundary { Periodic, Walls };

/// Uniform staggered grid on [0, length]. Scalars live at cell centres
/// x_j = (j + 1/2) h; velocities at faces, where u[j] belongs to the right face
/// x_{j+1/2} = (j + 1) h of cell j. With walls the last face is the boundary and
/// u[nx-1] is held at zero; the left boundary face is implicit and also zero.
struct Grid1D {
    int nx = 64;
    double length = 1.0;
    Boundary boundary = Boundary::Periodic;

    double h() const { return length / nx; }
    double cell_center(int j) const { return (j + 0.5) * h(); }
    double face(int j) const { return (j + 1) * h(); }
    bool periodic() const { return boundary == Boundary::Periodic; }

    int right_cell(int j) const { return (j + 1 < nx) ? j + 1 : (periodic() ? 0 : -1); }
    int left_cell(int j) const { return (j > 0) ? j - 1 : (periodic() ? nx - 1 : -1); }

    /// Velocity on the left face of cell j.
    double left_face_velocity(std::span<const double> u, int j) const {
        if (j > 0) return u[j - 1];
        return periodic() ? u[nx - 1] : 0.0;
    }
    double right_face_velocity(std::span<const double> u, int j) const {
        if (!periodic() && j == nx - 1) return 0.0;
        return u[j];
    }
    /// Discrete divergence of a face field at cell j.
    double divergence(std::span<const double> u, int j) const {
        return (right_face_velocity(u, j) - left_face_velocity(u, j)) / h();
    }
    /// Faces that carry a degree of freedom (interior faces for walls).
    bool active_face(int j) const { return periodic() || j < nx - 1; }

    bool operator==(const Grid1D&) const = default;
};

/// Maxwellian-normalised configuration density psi_hat(x_j, q_m), row-major with
/// one row of `n_config` values per physical cell.
struct ConfigDistribution {
    std::size_t nx = 0;
    std::size_t n_config = 0;
    std::vector<double> values;

    ConfigDistribution() = default;
    ConfigDistribution(std::size_t nx_, std::size_t nc_, double fill = 0.0)
        : nx(nx_), n_config(nc_), values(nx_ * nc_, fill) {}

    double& operator()(std::size_t j, std::size_t m) { return values[j * n_config + m]; }
    double operator()(std::size_t j, std::size_t m) const { return values[j * n_config + m]; }
    std::span<double> row(std::size_t j) { return std::span<double>(values).subspan(j * n_config, n_config); }
    std::span<const double> row(std::size_t j) const {
        return std::span<const double>(values).subspan(j * n_config, n_config);
    }
    bool operator==(const ConfigDistribution&) const = default;
};

inline void require_finite(std::span<const double> v, const std::string& what) {
    for (double x : v)
        if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, what + " contains non-finite values");
}

/// Solves a tridiagonal system in place (Thomas algorithm). sub[i] couples
/// row i to i-1, sup[i] couples row i to i+1; rhs is overwritten by the solution.
inline void solve_tridiagonal(std::span<const double> sub, std::span<const double> diag, std::span<const double> sup,
                              std::span<double> rhs) {
    const std::size_t n = diag.size();
    if (n == 0) return;
    std::vector<double> c(n);
    double denom = diag[0];
    if (denom == 0.0) throw Error(ErrorCode::Singular, "zero pivot in tridiagonal solve");
    c[0] = (n > 1) ? sup[0] / denom : 0.0;
    rhs[0] /= denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag[i] - sub[i] * c[i - 1];
        if (denom == 0.0) throw Error(ErrorCode::Singular, "zero pivot in tridiagonal solve");
        c[i] = (i + 1 < n) ? sup[i] / denom : 0.0;
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
}

/// Cyclic tridiagonal solve: sub[0] couples row 0 to row n-1 and sup[n-1]
/// couples row n-1 to row 0 (Sherman–Morrison on top of the Thomas solve).
inline void solve_cyclic_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                                     std::span<const double> sup, std::span<double> rhs) {
    const std::size_t n = diag.size();
    if (n < 3) throw Error(ErrorCode::InvalidArgument, "cyclic tridiagonal solve needs n >= 3");
    const double alpha = sup[n - 1];  // A(n-1, 0)
    const double beta = sub[0];       // A(0, n-1)
    const double gamma = -diag[0];
    std::vector<double> d(diag.begin(), diag.end());
    d[0] -= gamma;
    d[n - 1] -= alpha * beta / gamma;
    std::vector<double> lo(sub.begin(), sub.end()), up(sup.begin(), sup.end());
    lo[0] = 0.0;
    up[n - 1] = 0.0;
    solve_tridiagonal(lo, d, up, rhs);
    std::vector<double> z(n, 0.0);
    z[0] = gamma;
    z[n - 1] = alpha;
    solve_tridiagonal(lo, d, up, z);
    const double num = rhs[0] + beta * rhs[n - 1] / gamma;
    const double den = 1.0 + z[0] + beta * z[n - 1] / gamma;
    const double factor = num / den;
    for (std::size_t i = 0; i < n; ++i) rhs[i] -= factor * z[i];
}

/// Solves (I - coeff * L) v = rhs where L is the conservative three-point
/// Laplacian with unit face conductances: periodic or zero-flux ends. Solved
/// for the increment v - rhs, so a constant rhs is returned unchanged.
inline void solve_implicit_diffusion(std::span<double> rhs, double coeff, bool periodic) {
    const std::size_t n = rhs.size();
    if (coeff == 0.0 || n < 2) return;
    const bool wrap = periodic && n >= 3;
    std::vector<double> delta(n);
    bool flat = true;
    for (std::size_t i = 0; i < n; ++i) {
        const double right = (i + 1 < n) ? rhs[i + 1] - rhs[i] : (wrap ? rhs[0] - rhs[i] : 0.0);
        const double left = (i > 0) ? rhs[i] - rhs[i - 1] : (wrap ? rhs[0] - rhs[n - 1] : 0.0);
        delta[i] = coeff * (right - left);
        flat = flat && delta[i] == 0.0;
    }
    if (flat) return;
    std::vector<double> sub(n, -coeff), diag(n, 1.0 + 2.0 * coeff), sup(n, -coeff);
    if (wrap) {
        solve_cyclic_tridiagonal(sub, diag, sup, delta);
    } else {
        diag[0] = 1.0 + coeff;
        diag[n - 1] = 1.0 + coeff;
        sub[0] = 0.0;
        sup[n - 1] = 0.0;
        solve_tridiagonal(sub, diag, sup, delta);
    }
    for (std::size_t i = 0; i < n; ++i) rhs[i] += delta[i];
}

}  // namespace fenecongest
