#pragma once

// FENE spring potentials, Maxwellians and Maxwellian-weighted quadrature on the
// configuration balls D_i = B(0, sqrt(b_i)).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/tools/roots.hpp>

#include "fenecongest/error.hpp"

namespace fenecongest {

/// U(s) = -(b/2) log(1 - 2s/b) for the elongation variable s = |q|^2/2.
inline double fene_potential(double s, double b) {
    if (!(s >= 0.0)) throw Error(ErrorCode::InvalidArgument, "FENE potential needs s >= 0");
    if (s >= 0.5 * b) throw Error(ErrorCode::DomainOverflow, "s >= b/2: maximal spring extension reached");
    return -0.5 * b * std::log1p(-2.0 * s / b);
}

/// U'(s) = 1 / (1 - 2s/b).
inline double fene_potential_derivative(double s, double b) {
    if (s >= 0.5 * b) throw Error(ErrorCode::DomainOverflow, "s >= b/2: maximal spring extension reached");
    return 1.0 / (1.0 - 2.0 * s / b);
}

inline double squared_norm(std::span<const double> q) {
    double s = 0.0;
    for (double v : q) s += v * v;
    return s;
}

/// F(q) = U'(|q|^2/2) q = (1 - |q|^2/b)^{-1} q.
inline std::vector<double> spring_force(std::span<const double> q, double b) {
    const double q2 = squared_norm(q);
    if (q2 >= b) throw Error(ErrorCode::Singular, "spring force is singular for |q|^2 >= b");
    const double scale = 1.0 / (1.0 - q2 / b);
    std::vector<double> f(q.begin(), q.end());
    for (double& v : f) v *= scale;
    return f;
}

/// Z = int_{B(0, sqrt b)} (1 - |q|^2/b)^{b/2} dq in dimension d (1 or 2).
inline double maxwellian_normalization(double b, int d) {
    const double theta = 0.5 * b;
    if (d == 1) {
        return std::sqrt(b) * std::sqrt(std::numbers::pi) *
               std::exp(std::lgamma(theta + 1.0) - std::lgamma(theta + 1.5));
    }
    if (d == 2) return std::numbers::pi * b / (theta + 1.0);
    throw Error(ErrorCode::InvalidArgument, "configuration dimension must be 1 or 2");
}

/// Partial Maxwellian of one FENE spring with its normalisation precomputed.
struct PartialMaxwellian {
    double b = 4.0;
    int d = 1;
    double Z = maxwellian_normalization(4.0, 1);

    PartialMaxwellian() = default;
    PartialMaxwellian(double b_, int d_) : b(b_), d(d_), Z(maxwellian_normalization(b_, d_)) {
        if (!(b > 0.0)) throw Error(ErrorCode::InvalidArgument, "extensibility b must be positive");
    }

    /// Evaluated from 1 - |q|^2/b; zero on and outside the boundary of D_i.
    double from_gap(double one_minus) const {
        if (one_minus <= 0.0) return 0.0;
        return std::pow(one_minus, 0.5 * b) / Z;
    }

    double operator()(std::span<const double> q) const { return from_gap(1.0 - squared_norm(q) / b); }
};

inline double partial_maxwellian(std::span<const double> q, double b) {
    return PartialMaxwellian(b, static_cast<int>(q.size()))(q);
}

/// Node/weight set for one spring. `mass[m] = weight[m] * M(node m)` is the
/// Maxwellian measure carried by the node; the masses sum to one.
struct SpringQuadrature {
    int d = 1;
    double b = 4.0;
    std::vector<double> nodes;    ///< size() * d coordinates, node-major
    std::vector<double> weights;  ///< dq-measure weights
    std::vector<double> mass;     ///< weights[m] * M(node m)
    std::vector<double> force;    ///< U'(|q_m|^2/2), the scalar spring-force factor
    // d = 1 only: finite-volume cells [faces[m], faces[m+1]] with Maxwellian
    // measure mass[m]; face_maxwellian is M at each face (zero at +-sqrt b).
    std::vector<double> faces;
    std::vector<double> face_maxwellian;

    std::size_t size() const { return mass.size(); }
    std::span<const double> node(std::size_t m) const {
        return std::span<const double>(nodes).subspan(m * static_cast<std::size_t>(d), static_cast<std::size_t>(d));
    }
};

namespace detail {

/// Gauss–Jacobi nodes/weights for (1-x)^a (1+x)^c on [-1, 1] (Golub–Welsch).
/// Weights are returned up to a common positive factor.
inline void gauss_jacobi(int n, double a, double c, std::vector<double>& x, std::vector<double>& w) {
    Eigen::VectorXd diag(n), sub(std::max(n - 1, 1));
    const double s = a + c;
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * k + s;
        diag(k) = (k == 0) ? (c - a) / (s + 2.0) : (c * c - a * a) / (t * (t + 2.0));
    }
    for (int k = 1; k < n; ++k) {
        const double t = 2.0 * k + s;
        double beta;
        if (k == 1 && std::abs(a - c) < 1e-15) {
            beta = 1.0 / (3.0 + 2.0 * a);  // symmetric case with (1 + 2a) cancelled
        } else {
            beta = 4.0 * k * (k + a) * (k + c) * (k + s) / (t * t * (t + 1.0) * (t - 1.0));
        }
        sub(k - 1) = std::sqrt(beta);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::NonConvergence, "Golub-Welsch eigensolve failed");
    x.resize(n);
    w.resize(n);
    for (int k = 0; k < n; ++k) {
        x[k] = solver.eigenvalues()(k);
        const double v0 = solver.eigenvectors()(0, k);
        w[k] = v0 * v0;
    }
}

/// t with I_t(a, a) = p for p in (0, 1/2]; bracketed so it never leaves [0, 1/2].
inline double symmetric_beta_quantile(double a, double p) {
    if (p >= 0.5) return 0.5;
    auto f = [&](double t) { return boost::math::ibeta(a, a, t) - p; };
    std::uintmax_t iters = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(52);
    const auto r = boost::math::tools::toms748_solve(f, 0.0, 0.5, -p, 0.5 - p, tol, iters);
    return 0.5 * (r.first + r.second);
}

}  // namespace detail

/// Maxwellian-weighted quadrature on D = B(0, sqrt b).
///
/// The base rule is Gauss–Jacobi for the density (1 - |q|^2/b)^{b/2 - 1}, which is
/// U'(|q|^2/2) M up to a constant. It integrates p(q) M(q) exactly for
/// polynomials of degree <= 2n - 3 and the Kramers moment U' q q^T M exactly for
/// degree <= 2n - 1. In d = 2 the radial rule is tensored with a midpoint rule
/// over 2n angles.
inline SpringQuadrature build_quadrature(int n_nodes, double b, int d = 1) {
    if (n_nodes < 4) throw Error(ErrorCode::InvalidOrder, "quadrature needs at least 4 nodes");
    if (!(b > 0.0)) throw Error(ErrorCode::InvalidArgument, "extensibility b must be positive");
    if (d != 1 && d != 2) throw Error(ErrorCode::InvalidArgument, "configuration dimension must be 1 or 2");
    const double theta = 0.5 * b;
    const double root_b = std::sqrt(b);
    const PartialMaxwellian maxwellian(b, d);

    SpringQuadrature quad;
    quad.d = d;
    quad.b = b;
    std::vector<double> x, lambda;
    if (d == 1) {
        detail::gauss_jacobi(n_nodes, theta - 1.0, theta - 1.0, x, lambda);
        const int n = n_nodes;
        // exact mirror symmetry of the rule
        for (int k = 0; k < n / 2; ++k) {
            const double xs = 0.5 * (x[n - 1 - k] - x[k]);
            const double ws = 0.5 * (lambda[k] + lambda[n - 1 - k]);
            x[k] = -xs;
            x[n - 1 - k] = xs;
            lambda[k] = lambda[n - 1 - k] = ws;
        }
        if (n % 2 == 1) x[n / 2] = 0.0;
        std::vector<double> raw(n);
        double total = 0.0;
        for (int k = 0; k < n; ++k) {
            raw[k] = lambda[k] * (1.0 - x[k] * x[k]);
            total += raw[k];
        }
        quad.nodes.resize(n);
        quad.mass.resize(n);
        quad.weights.resize(n);
        quad.force.resize(n);
        for (int k = 0; k < n; ++k) {
            const double q = root_b * x[k];
            quad.nodes[k] = q;
            quad.mass[k] = raw[k] / total;
            quad.weights[k] = quad.mass[k] / maxwellian.from_gap(1.0 - x[k] * x[k]);
            quad.force[k] = 1.0 / (1.0 - x[k] * x[k]);
        }
        // Cells from the Maxwellian CDF: cell m carries exactly the measure mass[m].
        quad.faces.assign(n + 1, 0.0);
        quad.faces[0] = -root_b;
        quad.faces[n] = root_b;
        double cumulative = 0.0;
        for (int k = 0; k < n / 2; ++k) {
            cumulative += quad.mass[k];
            const double t = detail::symmetric_beta_quantile(theta + 1.0, cumulative);
            quad.faces[k + 1] = root_b * (2.0 * t - 1.0);
            quad.faces[n - 1 - k] = -quad.faces[k + 1];
        }
        if (n % 2 == 0) quad.faces[n / 2] = 0.0;
        quad.face_maxwellian.resize(n + 1);
        for (int k = 0; k <= n; ++k) {
            const double y = quad.faces[k] / root_b;
            quad.face_maxwellian[k] = (k == 0 || k == n) ? 0.0 : maxwellian.from_gap(1.0 - y * y);
        }
        for (int k = 0; k < n; ++k) {
            if (!(quad.faces[k] < quad.nodes[k] && quad.nodes[k] < quad.faces[k + 1]))
                throw Error(ErrorCode::NonConvergence, "quadrature nodes do not interlace with Maxwellian cells");
        }
    } else {
        detail::gauss_jacobi(n_nodes, theta - 1.0, 0.0, x, lambda);
        const int n_angles = 2 * n_nodes;
        std::vector<double> radial(n_nodes);
        double total = 0.0;
        for (int k = 0; k < n_nodes; ++k) {
            radial[k] = lambda[k] * (1.0 - x[k]);
            total += radial[k] * n_angles;
        }
        for (int k = 0; k < n_nodes; ++k) {
            const double t = 0.5 * (1.0 + x[k]);
            const double r = root_b * std::sqrt(t);
            for (int l = 0; l < n_angles; ++l) {
                const double phi = 2.0 * std::numbers::pi * (l + 0.5) / n_angles;
                quad.nodes.push_back(r * std::cos(phi));
                quad.nodes.push_back(r * std::sin(phi));
                const double mu = radial[k] / total;
                quad.mass.push_back(mu);
                quad.weights.push_back(mu / maxwellian.from_gap(1.0 - t));
                quad.force.push_back(1.0 / (1.0 - t));
            }
        }
    }
    return quad;
}

/// Default connectivity matrix: 2 on the diagonal, -1 off-diagonal.
inline Eigen::MatrixXd rouse_matrix(int K) {
    if (K < 1) throw Error(ErrorCode::InvalidArgument, "spring count K must be >= 1");
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(K, K);
    for (int i = 0; i < K; ++i) {
        A(i, i) = 2.0;
        if (i + 1 < K) A(i, i + 1) = A(i + 1, i) = -1.0;
    }
    return A;
}

inline Eigen::MatrixXd validate_rouse(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols() || A.rows() < 1) throw Error(ErrorCode::RejectedMatrix, "Rouse matrix must be square");
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-14 * std::max(1.0, A.cwiseAbs().maxCoeff()))
        throw Error(ErrorCode::RejectedMatrix, "Rouse matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
    if (eig.eigenvalues().minCoeff() <= 0.0)
        throw Error(ErrorCode::RejectedMatrix, "Rouse matrix must be positive definite (min eigenvalue " +
                                                   std::to_string(eig.eigenvalues().minCoeff()) + ")");
    return A;
}

/// Bead-spring chain: K FENE springs in dimension d with Rouse matrix A.
struct SpringModel {
    int K = 1;
    int d = 1;
    std::vector<double> b;
    Eigen::MatrixXd rouse;
    std::vector<PartialMaxwellian> maxwellians;
    std::vector<SpringQuadrature> quadrature;

    /// Number of configuration nodes of the tensor-product grid on D.
    std::size_t n_config() const {
        std::size_t n = 1;
        for (const auto& q : quadrature) n *= q.size();
        return n;
    }
};

inline SpringModel make_spring_model(std::vector<double> b, int n_nodes, int d = 1,
                                     std::optional<Eigen::MatrixXd> rouse_override = std::nullopt) {
    SpringModel model;
    model.K = static_cast<int>(b.size());
    model.d = d;
    if (model.K < 1) throw Error(ErrorCode::InvalidArgument, "at least one spring is required");
    for (double bi : b)
        if (!(bi > 2.0)) throw Error(ErrorCode::InvalidArgument, "FENE extensibility must satisfy b_i > 2");
    model.b = std::move(b);
    model.rouse = rouse_override ? validate_rouse(*rouse_override) : rouse_matrix(model.K);
    if (model.rouse.rows() != model.K) throw Error(ErrorCode::RejectedMatrix, "Rouse matrix size must equal K");
    for (double bi : model.b) {
        model.maxwellians.emplace_back(bi, d);
        model.quadrature.push_back(build_quadrature(n_nodes, bi, d));
    }
    return model;
}

/// M(q) = prod_i M_i(q_i) for q = (q_1, ..., q_K) stored contiguously.
inline double total_maxwellian(std::span<const double> q, const SpringModel& model) {
    if (q.size() != static_cast<std::size_t>(model.K * model.d))
        throw Error(ErrorCode::InvalidArgument, "conformation vector has wrong length");
    double m = 1.0;
    for (int i = 0; i < model.K; ++i) m *= model.maxwellians[i](q.subspan(i * model.d, model.d));
    return m;
}

struct PotentialCertificate {
    double b = 0.0;
    double theta = 0.0;
    double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
    double moment_bound = std::numeric_limits<double>::infinity();
    bool ratios_converged = false;
    bool passed = false;
};

/// Certifies the Maxwellian/force bounds for a FENE spring with theta = b/2:
///   c1 dist^theta <= M <= c2 dist^theta,   c3 <= dist U' <= c4,
/// with dist = dist(q, boundary of D); and evaluates int (1 + U^2) M dq.
/// The ratios are sampled on a dyadic ladder dist = sqrt(b) 2^{-k} until both
/// stabilise to `tolerance`.
inline PotentialCertificate certify_potential(double b, double tolerance = 1e-8, int d = 1) {
    if (!(b > 0.0)) throw Error(ErrorCode::InvalidArgument, "extensibility b must be positive");
    PotentialCertificate cert;
    cert.b = b;
    cert.theta = 0.5 * b;
    const PartialMaxwellian maxwellian(b, d);
    const double root_b = std::sqrt(b);

    auto density_ratio = [&](double dist) {
        const double gap = dist * (2.0 * root_b - dist) / b;  // 1 - |q|^2/b
        return maxwellian.from_gap(gap) / std::pow(dist, cert.theta);
    };
    auto force_ratio = [&](double dist) { return b / (2.0 * root_b - dist); };  // dist * U'

    double lo1 = std::numeric_limits<double>::infinity(), hi1 = 0.0;
    double lo2 = std::numeric_limits<double>::infinity(), hi2 = 0.0;
    auto absorb = [&](double dist) {
        const double r1 = density_ratio(dist), r2 = force_ratio(dist);
        lo1 = std::min(lo1, r1);
        hi1 = std::max(hi1, r1);
        lo2 = std::min(lo2, r2);
        hi2 = std::max(hi2, r2);
    };
    for (int k = 1; k < 64; ++k) absorb(root_b * k / 64.0);  // interior sweep
    absorb(root_b);
    double prev1 = density_ratio(root_b), prev2 = force_ratio(root_b);
    for (int k = 1; k <= 60; ++k) {
        const double dist = root_b * std::ldexp(1.0, -k);
        const double r1 = density_ratio(dist), r2 = force_ratio(dist);
        absorb(dist);
        if (std::abs(r1 - prev1) <= tolerance * std::abs(r1) && std::abs(r2 - prev2) <= tolerance * std::abs(r2)) {
            cert.ratios_converged = true;
            break;
        }
        prev1 = r1;
        prev2 = r2;
    }
    cert.c1 = lo1;
    cert.c2 = hi1;
    cert.c3 = lo2;
    cert.c4 = hi2;

    // int (1 + U^2) M over the ball, as a radial integral.
    boost::math::quadrature::tanh_sinh<double> integrator;
    auto integrand = [&](double r) {
        const double gap = 1.0 - r * r / b;
        if (gap <= 0.0) return 0.0;
        const double U = -0.5 * b * std::log(gap);
        const double shell = (d == 1) ? 2.0 : 2.0 * std::numbers::pi * r;
        return shell * (1.0 + U * U) * maxwellian.from_gap(gap);
    };
    try {
        cert.moment_bound = integrator.integrate(integrand, 0.0, root_b);
    } catch (const std::exception&) {
        cert.moment_bound = std::numeric_limits<double>::infinity();
    }
    cert.passed = cert.theta > 1.0 && cert.c1 > 0.0 && cert.c2 > 0.0 && cert.c3 > 0.0 && cert.c4 > 0.0 &&
                  std::isfinite(cert.moment_bound);
    return cert;
}

}  // namespace fenecongest
