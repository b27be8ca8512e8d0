#pragma once

// Polymer number density and Kramers extra stress from psi_hat.

#include <cstddef>
#include <optional>
#include <vector>

#include "fenecongest/config_grid.hpp"
#include "fenecongest/parallel.hpp"

namespace fenecongest {

/// How C_i weights each node. `Cell` uses the exact Maxwellian-cell integral of
/// U'(|q|^2/2) q q^T, i.e. mass[m] - [q M] across the cell, which is the discrete
/// dual of the kinetic drift; `Gauss` uses mass[m] * U'(q_m) q_m q_m^T.
enum class KramersRule { Cell, Gauss };

struct StressParams {
    double k = 1.0;
    double xi = 1.0;
    // trace coefficient l in tau1 = k [sum C_i - l eta I]; unset means K + 1
    std::optional<double> c_eta;
    KramersRule kramers = KramersRule::Cell;

    double trace_coefficient(int K) const { return c_eta.value_or(K + 1.0); }
};

struct StressField {
    std::size_t nx = 0;
    int d = 1;
    std::vector<double> eta;   ///< nx
    std::vector<double> tau1;  ///< nx * d * d, row-major per node
    std::vector<double> tau;   ///< tau1 - xi eta^2 I

    double tau1_at(std::size_t j, int a = 0, int b = 0) const { return tau1[(j * d + a) * d + b]; }
    double tau_at(std::size_t j, int a = 0, int b = 0) const { return tau[(j * d + a) * d + b]; }
};

/// Per-node d x d weights, such that C_i(x_j) = sum_m psi_hat(x_j, m) W_m.
inline std::vector<double> kramers_weights(const SpringModel& model, int spring, KramersRule rule) {
    const auto& quad = model.quadrature[spring];
    const int d = model.d;
    std::vector<double> w(quad.size() * d * d, 0.0);
    for (std::size_t k = 0; k < quad.size(); ++k) {
        if (d == 1 && rule == KramersRule::Cell) {
            const double jump = quad.faces[k + 1] * quad.face_maxwellian[k + 1] - quad.faces[k] * quad.face_maxwellian[k];
            w[k] = quad.mass[k] - jump;
            continue;
        }
        const auto q = quad.node(k);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) w[(k * d + a) * d + b] = quad.mass[k] * quad.force[k] * q[a] * q[b];
    }
    return w;
}

inline void require_config_grid(const ConfigDistribution& psi_hat, const ConfigGrid& g) {
    if (psi_hat.n_config != g.size() || psi_hat.values.size() != psi_hat.nx * psi_hat.n_config)
        throw Error(ErrorCode::GridMismatch, "psi_hat does not match the spring model grid");
}

/// eta(x_j) = sum_m w_m M(q_m) psi_hat(x_j, q_m).
inline std::vector<double> polymer_density(const ConfigDistribution& psi_hat, const SpringModel& model) {
    const ConfigGrid g = make_config_grid(model);
    require_config_grid(psi_hat, g);
    std::vector<double> eta(psi_hat.nx, 0.0);
    for (std::size_t j = 0; j < psi_hat.nx; ++j) {
        double s = 0.0;
        for (std::size_t m = 0; m < g.size(); ++m) s += g.mass[m] * psi_hat(j, m);
        eta[j] = s;
    }
    return eta;
}

/// C_i(x_j) = int psi U_i' q_i q_i^T dq, flattened as nx blocks of d x d.
inline std::vector<double> kramers_moment(const ConfigDistribution& psi_hat, const SpringModel& model, int spring,
                                          KramersRule rule = KramersRule::Cell) {
    if (spring < 0 || spring >= model.K) throw Error(ErrorCode::InvalidArgument, "spring index out of range");
    const ConfigGrid g = make_config_grid(model);
    require_config_grid(psi_hat, g);
    const int d = model.d;
    const std::size_t dd = static_cast<std::size_t>(d * d);
    const auto w = kramers_weights(model, spring, rule);
    // transverse masses of the other springs
    std::vector<double> other(g.size(), 1.0);
    for (std::size_t m = 0; m < g.size(); ++m)
        for (int i = 0; i < model.K; ++i)
            if (i != spring) other[m] *= model.quadrature[i].mass[g.node_index(m, i)];
    std::vector<double> C(psi_hat.nx * dd, 0.0);
    for (std::size_t j = 0; j < psi_hat.nx; ++j) {
        for (std::size_t m = 0; m < g.size(); ++m) {
            const double s = psi_hat(j, m) * other[m];
            const std::size_t k = g.node_index(m, spring);
            for (std::size_t e = 0; e < dd; ++e) C[j * dd + e] += s * w[k * dd + e];
        }
        // symmetric by construction; remove rounding asymmetry
        for (int a = 0; a < d; ++a)
            for (int b = a + 1; b < d; ++b) {
                const double avg = 0.5 * (C[j * dd + a * d + b] + C[j * dd + b * d + a]);
                C[j * dd + a * d + b] = C[j * dd + b * d + a] = avg;
            }
    }
    return C;
}

/// tau1 = k [sum_i C_i - l eta I] and tau = tau1 - xi eta^2 I.
inline StressField extra_stress(const ConfigDistribution& psi_hat, const SpringModel& model, const StressParams& params) {
    StressField out;
    out.nx = psi_hat.nx;
    out.d = model.d;
    out.eta = polymer_density(psi_hat, model);
    const int d = model.d;
    const std::size_t dd = static_cast<std::size_t>(d * d);
    out.tau1.assign(out.nx * dd, 0.0);
    for (int i = 0; i < model.K; ++i) {
        const auto C = kramers_moment(psi_hat, model, i, params.kramers);
        for (std::size_t e = 0; e < C.size(); ++e) out.tau1[e] += C[e];
    }
    const double l = params.trace_coefficient(model.K);
    out.tau = out.tau1;
    for (std::size_t j = 0; j < out.nx; ++j) {
        for (std::size_t e = 0; e < dd; ++e) out.tau1[j * dd + e] *= params.k;
        for (int a = 0; a < d; ++a) out.tau1[j * dd + a * d + a] -= params.k * l * out.eta[j];
        for (std::size_t e = 0; e < dd; ++e) out.tau[j * dd + e] = out.tau1[j * dd + e];
        for (int a = 0; a < d; ++a) out.tau[j * dd + a * d + a] -= params.xi * out.eta[j] * out.eta[j];
    }
    return out;
}

}  // namespace fenecongest
