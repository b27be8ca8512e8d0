#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fenecongest/grid.hpp"
#include "fenecongest/potentials.hpp"

namespace fenecongest {

/// Tensor-product index map over the K spring grids. Spring 0 varies slowest.
struct ConfigGrid {
    int K = 1;
    int d = 1;
    std::vector<std::size_t> extent;
    std::vector<std::size_t> stride;
    std::vector<double> mass;        ///< product of per-spring node masses
    std::vector<double> maxwellian;  ///< M(q_m) at each product node

    std::size_t size() const { return mass.size(); }
    std::size_t node_index(std::size_t m, int spring) const { return (m / stride[spring]) % extent[spring]; }
};

inline ConfigGrid make_config_grid(const SpringModel& model) {
    ConfigGrid g;
    g.K = model.K;
    g.d = model.d;
    g.extent.resize(model.K);
    g.stride.resize(model.K);
    std::size_t n = 1;
    for (int i = model.K - 1; i >= 0; --i) {
        g.extent[i] = model.quadrature[i].size();
        g.stride[i] = n;
        n *= g.extent[i];
    }
    g.mass.assign(n, 1.0);
    g.maxwellian.assign(n, 1.0);
    for (std::size_t m = 0; m < n; ++m) {
        for (int i = 0; i < model.K; ++i) {
            const std::size_t k = g.node_index(m, i);
            g.mass[m] *= model.quadrature[i].mass[k];
            g.maxwellian[m] *= model.maxwellians[i](model.quadrature[i].node(k));
        }
    }
    return g;
}

/// psi = M psi_hat at every node of the product grid.
inline ConfigDistribution recover_psi(const ConfigDistribution& psi_hat, const SpringModel& model) {
    const ConfigGrid g = make_config_grid(model);
    if (psi_hat.n_config != g.size()) throw Error(ErrorCode::GridMismatch, "psi_hat does not match the spring model grid");
    ConfigDistribution psi = psi_hat;
    for (std::size_t j = 0; j < psi.nx; ++j)
        for (std::size_t m = 0; m < g.size(); ++m) psi(j, m) *= g.maxwellian[m];
    return psi;
}

}  // namespace fenecongest
