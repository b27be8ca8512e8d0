#pragma once

// Fokker–Planck solver for psi_hat = psi / M on the physical x configuration grid.
//
// Finite volumes in q: node m of spring i owns the Maxwellian cell with measure
// mass[m]. Unknowns are cell values of psi_hat, so the polymer mass of row j is
// sum_m mass[m] psi_hat(j, m). The q-diffusion (1/4 lambda) sum A_ij
// div_i(M grad_j psi_hat) is assembled as the symmetric form S with face
// conductances M(q_f) mass_transverse / dq, and the drift sigma(u) q M beta^L is
// an upwind flux through the same faces.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "fenecongest/config_grid.hpp"
#include "fenecongest/grid.hpp"
#include "fenecongest/parallel.hpp"
#include "fenecongest/potentials.hpp"

namespace fenecongest {

struct KineticParams {
    double epsilon = 0.05;
    double lambda = 1.0;
    double cutoff_L = std::numeric_limits<double>::infinity();
    double zeta = 1.0;
    bool implicit_x_diffusion = false;
};

inline double cutoff(double s, double L) { return std::min(s, L); }

enum KineticTerm : unsigned {
    kTransport = 1u,
    kXDiffusion = 2u,
    kDrift = 4u,
    kQDiffusion = 8u,
    kAllTerms = 15u,
};

struct KineticStepLog {
    std::size_t clipped_nodes = 0;
    double mass_correction = 0.0;  ///< polymer mass added back after clipping (summed over rows)
    int max_refinements = 0;
};

inline void validate_kinetic_params(const KineticParams& p) {
    if (!(p.epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "kinetic epsilon must be > 0");
    if (!(p.lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "kinetic lambda must be > 0");
    if (!(p.cutoff_L > 1.0)) throw Error(ErrorCode::InvalidArgument, "cutoff level L must be > 1");
    if (p.zeta != 1.0) throw Error(ErrorCode::InvalidArgument, "drag coefficient zeta is fixed to 1");
}

class KineticSolver {
public:
    using SparseMatrix = Eigen::SparseMatrix<double>;

    KineticSolver(Grid1D grid, SpringModel model, KineticParams params, bool validate = true)
        : grid_(grid), model_(std::move(model)), params_(params), cg_(make_config_grid(model_)),
          cache_(std::make_shared<FactorCache>()) {
        if (validate) validate_kinetic_params(params_);
        if (model_.d != 1) throw Error(ErrorCode::InvalidArgument, "the kinetic solver needs d = 1 springs");
        build_operators();
    }

    const Grid1D& grid() const { return grid_; }
    const SpringModel& model() const { return model_; }
    const KineticParams& params() const { return params_; }
    const ConfigGrid& config() const { return cg_; }
    std::size_t n_config() const { return cg_.size(); }
    const SparseMatrix& stiffness() const { return S_; }

    ConfigDistribution uniform(double value = 1.0) const {
        return ConfigDistribution(static_cast<std::size_t>(grid_.nx), cg_.size(), value);
    }

    /// sum_j h sum_m mass[m] psi_hat(j, m)
    double total_mass(const ConfigDistribution& psi) const {
        check(psi);
        double s = 0.0;
        for (std::size_t j = 0; j < psi.nx; ++j) s += row_mass(psi.row(j));
        return s * grid_.h();
    }

    double row_mass(std::span<const double> row) const {
        double s = 0.0;
        for (std::size_t m = 0; m < row.size(); ++m) s += cg_.mass[m] * row[m];
        return s;
    }

    /// (S v)_m in flux form: exactly zero for constant v.
    void apply_q_diffusion(std::span<const double> v, std::span<double> out) const {
        std::fill(out.begin(), out.end(), 0.0);
        for (const auto& f : faces_) {
            const double flux = f.conductance * (v[f.lo] - v[f.hi]);
            out[f.lo] += flux;
            out[f.hi] -= flux;
        }
        for (const auto& c : corners_) {
            double g1 = 0.0, g2 = 0.0;
            for (int a = 0; a < 4; ++a) {
                g1 += c.g1[a] * v[c.node[a]];
                g2 += c.g2[a] * v[c.node[a]];
            }
            for (int a = 0; a < 4; ++a) out[c.node[a]] += c.weight * (g1 * c.g2[a] + g2 * c.g1[a]);
        }
    }

    /// v^T S v: the discrete (1/4 lambda) sum A_ij int M d_i v d_j v.
    double q_dirichlet(std::span<const double> v) const {
        double s = 0.0;
        for (const auto& f : faces_) {
            const double dv = v[f.lo] - v[f.hi];
            s += f.conductance * dv * dv;
        }
        for (const auto& c : corners_) {
            double g1 = 0.0, g2 = 0.0;
            for (int a = 0; a < 4; ++a) {
                g1 += c.g1[a] * v[c.node[a]];
                g2 += c.g2[a] * v[c.node[a]];
            }
            s += 2.0 * c.weight * g1 * g2;
        }
        return s;
    }

    /// sigma_j = (grad u) at cell j, which is div u in one space dimension.
    double velocity_gradient(std::span<const double> u, int j) const { return grid_.divergence(u, j); }

    /// Semi-discrete tendency d psi_hat / dt restricted to the selected terms.
    ConfigDistribution fp_rhs(const ConfigDistribution& psi, std::span<const double> u, unsigned terms = kAllTerms,
                              int threads = 1) const {
        check(psi);
        check_velocity(u);
        ConfigDistribution out(psi.nx, psi.n_config, 0.0);
        parallel_for(psi.nx, threads, [&](std::size_t j) {
            std::vector<double> tmp(cg_.size());
            auto row = out.row(j);
            explicit_tendency(psi, u, static_cast<int>(j), terms, row);
            if (terms & kQDiffusion) {
                apply_q_diffusion(psi.row(j), tmp);
                for (std::size_t m = 0; m < cg_.size(); ++m) row[m] -= tmp[m] / cg_.mass[m];
            }
        });
        return out;
    }

    /// Largest dt keeping the explicit part (transport, drift, explicit
    /// x-diffusion) monotone: dt * outflow rate <= 1 at every node.
    double max_stable_dt(std::span<const double> u) const {
        check_velocity(u);
        const double h = grid_.h();
        double rate = 0.0;
        const double diffusion = params_.implicit_x_diffusion ? 0.0 : 2.0 * params_.epsilon / (h * h);
        for (int j = 0; j < grid_.nx; ++j) {
            const double ur = grid_.right_face_velocity(u, j), ul = grid_.left_face_velocity(u, j);
            const double transport = (std::max(ur, 0.0) + std::max(-ul, 0.0)) / h;
            const double sigma = velocity_gradient(u, j);
            const auto& out = sigma >= 0.0 ? out_pos_ : out_neg_;
            double drift = 0.0;
            for (double r : out) drift = std::max(drift, r);
            rate = std::max(rate, transport + diffusion + std::abs(sigma) * drift);
        }
        return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
    }

    /// One step: explicit upwind transport/drift (+ explicit or implicit
    /// x-diffusion), then implicit q-diffusion, then the positivity safeguard.
    ConfigDistribution fp_step(const ConfigDistribution& psi, std::span<const double> u, double dt,
                               KineticStepLog* log = nullptr, int threads = 1) const {
        check(psi);
        check_velocity(u);
        if (dt < 0.0 || !std::isfinite(dt)) throw Error(ErrorCode::InvalidArgument, "dt must be finite and >= 0");
        if (dt == 0.0) return psi;
        const double limit = max_stable_dt(u);
        if (dt > limit * (1.0 + 1e-12))
            throw Error(ErrorCode::CflViolation, "kinetic dt " + std::to_string(dt) + " exceeds stable limit " +
                                                     std::to_string(limit));
        const std::size_t nc = cg_.size();
        const unsigned explicit_terms = kTransport | kDrift | (params_.implicit_x_diffusion ? 0u : kXDiffusion);

        ConfigDistribution star(psi.nx, nc, 0.0);
        parallel_for(psi.nx, threads, [&](std::size_t j) {
            auto row = star.row(j);
            explicit_tendency(psi, u, static_cast<int>(j), explicit_terms, row);
            const auto old = psi.row(j);
            for (std::size_t m = 0; m < nc; ++m) row[m] = old[m] + dt * row[m];
        });

        if (params_.implicit_x_diffusion) {
            const double coeff = dt * params_.epsilon / (grid_.h() * grid_.h());
            parallel_for(nc, threads, [&](std::size_t m) {
                std::vector<double> col(psi.nx);
                for (std::size_t j = 0; j < psi.nx; ++j) col[j] = star(j, m);
                solve_implicit_diffusion(col, coeff, grid_.periodic());
                for (std::size_t j = 0; j < psi.nx; ++j) star(j, m) = col[j];
            });
        }

        const auto factor = factorization(dt);
        std::vector<std::size_t> clipped(psi.nx, 0);
        std::vector<double> correction(psi.nx, 0.0);
        std::vector<int> refinements(psi.nx, 0);
        ConfigDistribution next(psi.nx, nc, 0.0);
        parallel_for(psi.nx, threads, [&](std::size_t j) {
            const auto in = star.row(j);
            Eigen::VectorXd r(nc), delta(nc), residual(nc);
            std::vector<double> sv(nc);
            apply_q_diffusion(in, sv);
            double scale = 0.0;
            for (std::size_t m = 0; m < nc; ++m) {
                r(m) = -dt * sv[m];
                scale = std::max(scale, std::abs(cg_.mass[m] * in[m]));
            }
            auto out = next.row(j);
            if (r.lpNorm<Eigen::Infinity>() == 0.0) {
                for (std::size_t m = 0; m < nc; ++m) out[m] = in[m];
            } else {
                delta = factor->ldlt.solve(r);
                int it = 0;
                double res_norm = 0.0;
                for (; it < 200; ++it) {
                    residual = r - factor->system * delta;
                    res_norm = residual.lpNorm<Eigen::Infinity>();
                    if (res_norm <= 1e-15 * scale || !std::isfinite(res_norm)) break;
                    const Eigen::VectorXd correction_step = factor->ldlt.solve(residual);
                    if (correction_step.lpNorm<Eigen::Infinity>() <= 1e-17 * delta.lpNorm<Eigen::Infinity>()) break;
                    delta += correction_step;
                }
                if (!(res_norm <= 1e-10 * std::max(scale, std::numeric_limits<double>::min())))
                    throw Error(ErrorCode::NonConvergence, "implicit q-diffusion solve missed tolerance 1e-10");
                refinements[j] = it;
                for (std::size_t m = 0; m < nc; ++m) out[m] = in[m] + delta(static_cast<Eigen::Index>(m));
            }
            enforce_positivity(out, clipped[j], correction[j]);
        });
        if (log) {
            log->clipped_nodes = 0;
            log->mass_correction = 0.0;
            log->max_refinements = 0;
            for (std::size_t j = 0; j < psi.nx; ++j) {
                log->clipped_nodes += clipped[j];
                log->mass_correction += correction[j] * grid_.h();
                log->max_refinements = std::max(log->max_refinements, refinements[j]);
            }
        }
        return next;
    }

private:
    struct Face {
        std::size_t lo = 0, hi = 0;  ///< hi sits on the +q side
        double drift = 0.0;          ///< q_f M(q_f) times the transverse mass
        double conductance = 0.0;    ///< (A_ii / 4 lambda) M(q_f) transverse mass / dq
    };
    struct Corner {
        std::array<std::size_t, 4> node{};
        std::array<double, 4> g1{}, g2{};
        double weight = 0.0;  ///< (A_12 / 4 lambda) M_1 M_2 dq_1 dq_2 at the corner
    };
    struct Factorization {
        SparseMatrix system;
        Eigen::SimplicialLDLT<SparseMatrix> ldlt;
    };
    struct FactorCache {
        std::mutex mutex;
        double dt = -1.0;
        std::shared_ptr<const Factorization> factor;
    };

    void check(const ConfigDistribution& psi) const {
        if (psi.nx != static_cast<std::size_t>(grid_.nx) || psi.n_config != cg_.size() ||
            psi.values.size() != psi.nx * psi.n_config)
            throw Error(ErrorCode::GridMismatch, "psi_hat grid does not match the kinetic solver grid");
    }
    void check_velocity(std::span<const double> u) const {
        if (u.size() != static_cast<std::size_t>(grid_.nx))
            throw Error(ErrorCode::GridMismatch, "velocity grid does not match the kinetic solver grid");
    }

    void build_operators() {
        const double inv4l = 1.0 / (4.0 * params_.lambda);
        const auto& A = model_.rouse;
        const std::size_t nc = cg_.size();
        for (int i = 0; i < model_.K; ++i) {
            const auto& quad = model_.quadrature[i];
            const std::size_t n = quad.size();
            for (std::size_t m = 0; m < nc; ++m) {
                const std::size_t k = cg_.node_index(m, i);
                if (k == 0) continue;
                double transverse = 1.0;
                for (int t = 0; t < model_.K; ++t)
                    if (t != i) transverse *= model_.quadrature[t].mass[cg_.node_index(m, t)];
                Face f;
                f.lo = m - cg_.stride[i];
                f.hi = m;
                f.drift = quad.faces[k] * quad.face_maxwellian[k] * transverse;
                f.conductance = A(i, i) * inv4l * quad.face_maxwellian[k] * transverse / (quad.nodes[k] - quad.nodes[k - 1]);
                faces_.push_back(f);
            }
            (void)n;
        }
        if (model_.K == 2 && A(0, 1) != 0.0) {
            const auto& q1 = model_.quadrature[0];
            const auto& q2 = model_.quadrature[1];
            auto id = [&](std::size_t a, std::size_t b) { return a * cg_.stride[0] + b * cg_.stride[1]; };
            for (std::size_t a = 1; a < q1.size(); ++a) {
                for (std::size_t b = 1; b < q2.size(); ++b) {
                    const double h1 = q1.nodes[a] - q1.nodes[a - 1];
                    const double h2 = q2.nodes[b] - q2.nodes[b - 1];
                    Corner c;
                    // nodes: (a-1,b-1), (a,b-1), (a-1,b), (a,b)
                    c.node = {id(a - 1, b - 1), id(a, b - 1), id(a - 1, b), id(a, b)};
                    c.g1 = {-0.5 / h1, 0.5 / h1, -0.5 / h1, 0.5 / h1};
                    c.g2 = {-0.5 / h2, -0.5 / h2, 0.5 / h2, 0.5 / h2};
                    c.weight = A(0, 1) * inv4l * q1.face_maxwellian[a] * q2.face_maxwellian[b] * h1 * h2;
                    corners_.push_back(c);
                }
            }
        } else if (model_.K > 2) {
            for (int i = 0; i < model_.K; ++i)
                for (int k = 0; k < model_.K; ++k)
                    if (i != k && A(i, k) != 0.0)
                        throw Error(ErrorCode::InvalidArgument, "off-diagonal Rouse coupling is supported for K <= 2");
        }

        std::vector<Eigen::Triplet<double>> trip;
        for (const auto& f : faces_) {
            trip.emplace_back(f.lo, f.lo, f.conductance);
            trip.emplace_back(f.hi, f.hi, f.conductance);
            trip.emplace_back(f.lo, f.hi, -f.conductance);
            trip.emplace_back(f.hi, f.lo, -f.conductance);
        }
        for (const auto& c : corners_)
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    trip.emplace_back(c.node[a], c.node[b], c.weight * (c.g1[a] * c.g2[b] + c.g2[a] * c.g1[b]));
        S_.resize(static_cast<Eigen::Index>(nc), static_cast<Eigen::Index>(nc));
        S_.setFromTriplets(trip.begin(), trip.end());

        out_pos_.assign(nc, 0.0);
        out_neg_.assign(nc, 0.0);
        for (const auto& f : faces_) {
            // sigma > 0: flux sigma * drift leaves lo when drift > 0, hi when drift < 0
            if (f.drift > 0.0) {
                out_pos_[f.lo] += f.drift;
                out_neg_[f.hi] += f.drift;
            } else {
                out_pos_[f.hi] -= f.drift;
                out_neg_[f.lo] -= f.drift;
            }
        }
        for (std::size_t m = 0; m < nc; ++m) {
            out_pos_[m] /= cg_.mass[m];
            out_neg_[m] /= cg_.mass[m];
        }
    }

    void explicit_tendency(const ConfigDistribution& psi, std::span<const double> u, int j, unsigned terms,
                           std::span<double> out) const {
        const std::size_t nc = cg_.size();
        const double h = grid_.h();
        std::fill(out.begin(), out.end(), 0.0);
        const auto row = psi.row(static_cast<std::size_t>(j));
        const int jl = grid_.left_cell(j), jr = grid_.right_cell(j);
        if (terms & kTransport) {
            const double ur = grid_.right_face_velocity(u, j), ul = grid_.left_face_velocity(u, j);
            for (std::size_t m = 0; m < nc; ++m) {
                const double right = (jr < 0) ? 0.0 : (ur >= 0.0 ? ur * row[m] : ur * psi(jr, m));
                const double left = (jl < 0) ? 0.0 : (ul >= 0.0 ? ul * psi(jl, m) : ul * row[m]);
                out[m] -= (right - left) / h;
            }
        }
        if (terms & kXDiffusion) {
            const double c = params_.epsilon / (h * h);
            for (std::size_t m = 0; m < nc; ++m) {
                const double right = (jr < 0) ? 0.0 : psi(jr, m) - row[m];
                const double left = (jl < 0) ? 0.0 : row[m] - psi(jl, m);
                out[m] += c * (right - left);
            }
        }
        if (terms & kDrift) {
            const double sigma = velocity_gradient(u, j);
            if (sigma != 0.0) {
                const double L = params_.cutoff_L;
                for (const auto& f : faces_) {
                    const double a = sigma * f.drift;
                    const double upwind = a >= 0.0 ? row[f.lo] : row[f.hi];
                    const double flux = a * cutoff(upwind, L);
                    out[f.lo] -= flux / cg_.mass[f.lo];
                    out[f.hi] += flux / cg_.mass[f.hi];
                }
            }
        }
    }

    std::shared_ptr<const Factorization> factorization(double dt) const {
        std::lock_guard lock(cache_->mutex);
        if (cache_->factor && cache_->dt == dt) return cache_->factor;
        auto f = std::make_shared<Factorization>();
        const auto nc = static_cast<Eigen::Index>(cg_.size());
        SparseMatrix D(nc, nc);
        std::vector<Eigen::Triplet<double>> diag;
        for (Eigen::Index m = 0; m < nc; ++m) diag.emplace_back(m, m, cg_.mass[m]);
        D.setFromTriplets(diag.begin(), diag.end());
        f->system = D + dt * S_;
        f->ldlt.compute(f->system);
        if (f->ldlt.info() != Eigen::Success)
            throw Error(ErrorCode::NonConvergence, "factorization of the q-diffusion system failed");
        cache_->dt = dt;
        cache_->factor = f;
        return f;
    }

    void enforce_positivity(std::span<double> row, std::size_t& clipped, double& added) const {
        double before = 0.0, after = 0.0;
        std::size_t count = 0;
        for (std::size_t m = 0; m < row.size(); ++m) {
            before += cg_.mass[m] * row[m];
            if (row[m] < 0.0) {
                row[m] = 0.0;
                ++count;
            }
            after += cg_.mass[m] * row[m];
        }
        clipped = count;
        added = 0.0;
        if (count == 0) return;
        if (before > 0.0 && after > 0.0) {
            const double s = before / after;
            for (double& v : row) v *= s;
            added = before - after;
        } else {
            added = -after;
            std::fill(row.begin(), row.end(), 0.0);
        }
    }

    Grid1D grid_;
    SpringModel model_;
    KineticParams params_;
    ConfigGrid cg_;
    std::vector<Face> faces_;
    std::vector<Corner> corners_;
    SparseMatrix S_;
    std::vector<double> out_pos_, out_neg_;
    std::shared_ptr<FactorCache> cache_;
};

}  // namespace fenecongest
