#pragma once

// Congestion-limit observables at finite gamma.

#include <algorithm>
#include <cmath>
#include <span>

#include "fenecongest/fluid.hpp"

namespace fenecongest {

/// rho / rho* for the congestion law, rho otherwise.
inline double congestion_ratio(const PressureLaw& law, double rho, std::size_t j) {
    return law.kind == PressureKind::Congestion ? rho / law.rho_star(j) : rho;
}

/// The part of the pressure that blows up with gamma: (rho / rho*)^gamma.
inline double stiff_pressure(const PressureLaw& law, double rho, std::size_t j) {
    return std::pow(congestion_ratio(law, rho, j), law.gamma);
}

/// (int max(rho / rho* - 1, 0)^p dx)^(1/p); an empty threshold means rho* = 1.
inline double excess_norm(std::span<const double> rho, double p, std::span<const double> threshold, double h) {
    if (!(p >= 1.0)) throw Error(ErrorCode::InvalidArgument, "excess norm needs p >= 1");
    if (!threshold.empty() && threshold.size() != rho.size())
        throw Error(ErrorCode::GridMismatch, "threshold field does not match rho");
    double s = 0.0;
    for (std::size_t j = 0; j < rho.size(); ++j) {
        const double star = threshold.empty() ? 1.0 : threshold[j];
        const double e = std::max(rho[j] / star - 1.0, 0.0);
        if (e > 0.0) s += std::pow(e, p) * h;
    }
    return std::pow(s, 1.0 / p);
}

inline double excess_norm(std::span<const double> rho, double p, const PressureLaw& law, double h) {
    return excess_norm(rho, p, law.kind == PressureKind::Congestion ? std::span<const double>(law.threshold)
                                                                    : std::span<const double>(),
                       h);
}

/// int (rho / rho*)^gamma |rho / rho* - 1| dx. For the general law only the
/// rho^gamma part is singular, so it is the one paired with |rho - 1|.
inline double complementarity_residual(std::span<const double> rho, const PressureLaw& law, double h) {
    double s = 0.0;
    for (std::size_t j = 0; j < rho.size(); ++j) {
        const double r = congestion_ratio(law, rho[j], j);
        s += std::pow(r, law.gamma) * std::abs(r - 1.0) * h;
    }
    return s;
}

/// int (rho / rho*)^gamma dx.
inline double stiff_pressure_integral(std::span<const double> rho, const PressureLaw& law, double h) {
    double s = 0.0;
    for (std::size_t j = 0; j < rho.size(); ++j) s += stiff_pressure(law, rho[j], j) * h;
    return s;
}

/// |{rho / rho* > 1 - delta}| / |Omega| with cells counted whole.
inline double congestion_fraction(std::span<const double> rho, const PressureLaw& law, double delta) {
    if (rho.empty()) return 0.0;
    std::size_t n = 0;
    for (std::size_t j = 0; j < rho.size(); ++j)
        if (congestion_ratio(law, rho[j], j) > 1.0 - delta) ++n;
    return static_cast<double>(n) / static_cast<double>(rho.size());
}

inline double max_value(std::span<const double> v) {
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

}  // namespace fenecongest
