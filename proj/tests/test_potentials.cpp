#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "fenecongest/potentials.hpp"

using namespace fenecongest;

namespace {

// Independent oracle: adaptive Gauss–Kronrod over [-sqrt b, sqrt b].
template <class F>
double integrate_ball_1d(F f, double b) {
    const double r = std::sqrt(b);
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -r, r, 15, 1e-14);
}

double expect_code(ErrorCode code, auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), code) << e.what();
        return 1.0;
    }
    ADD_FAILURE() << "expected error " << to_string(code);
    return 0.0;
}

}  // namespace

TEST(FenePotential, ClosedFormValues) {
    EXPECT_EQ(fene_potential(0.0, 4.0), 0.0);
    EXPECT_NEAR(fene_potential(1.0, 4.0), 2.0 * std::log(2.0), 1e-15);
    EXPECT_NEAR(fene_potential(1.0, 4.0), 1.3862944, 1e-7);
    expect_code(ErrorCode::DomainOverflow, [] { fene_potential(2.0, 4.0); });
    expect_code(ErrorCode::DomainOverflow, [] { fene_potential(3.5, 4.0); });
}

TEST(FenePotential, IncreasingAndConvex) {
    const double b = 6.0;
    double prev = fene_potential(0.0, b), prev_slope = 0.0;
    for (int k = 1; k < 300; ++k) {
        const double s = 0.01 * k;
        const double v = fene_potential(s, b);
        EXPECT_GT(v, prev);
        const double slope = (v - prev) / 0.01;
        EXPECT_GT(slope, prev_slope);
        prev = v;
        prev_slope = slope;
    }
}

TEST(SpringForce, Values) {
    const std::vector<double> zero{0.0}, one{1.0}, two{2.0};
    EXPECT_EQ(spring_force(zero, 4.0)[0], 0.0);
    EXPECT_NEAR(spring_force(one, 4.0)[0], 4.0 / 3.0, 1e-15);
    expect_code(ErrorCode::Singular, [&] { spring_force(two, 4.0); });
}

TEST(SpringForce, GradientOfPotential) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double b = 2.5 + 6.0 * (0.5 * (unit(rng) + 1.0));
        std::vector<double> q{unit(rng), unit(rng)};
        const double scale = 0.95 * std::sqrt(b) * std::abs(unit(rng)) / std::sqrt(squared_norm(q));
        for (double& v : q) v *= scale;
        const auto f = spring_force(q, b);
        for (int i = 0; i < 2; ++i) {
            const double step = 1e-6;
            auto qp = q, qm = q;
            qp[i] += step;
            qm[i] -= step;
            const double fd =
                (fene_potential(0.5 * squared_norm(qp), b) - fene_potential(0.5 * squared_norm(qm), b)) / (2 * step);
            EXPECT_NEAR(fd, f[i], 1e-6 * std::max(1.0, std::abs(f[i])));
        }
    }
}

TEST(Maxwellian, NormalizationOracle) {
    EXPECT_NEAR(maxwellian_normalization(4.0, 1), 32.0 / 15.0, 1e-14);
    const double z = integrate_ball_1d([](double q) { return std::pow(1.0 - q * q / 4.0, 2.0); }, 4.0);
    EXPECT_NEAR(z, 32.0 / 15.0, 1e-13);
    for (double b : {2.5, 3.0, 8.0, 17.0}) {
        const double zb = integrate_ball_1d([b](double q) { return std::pow(std::max(0.0, 1.0 - q * q / b), b / 2); }, b);
        EXPECT_NEAR(maxwellian_normalization(b, 1), zb, 1e-12 * zb) << b;
    }
    // d = 2: radial integral 2 pi int r (1 - r^2/b)^{b/2} dr
    for (double b : {3.0, 4.0, 10.0}) {
        const double zb = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [b](double r) { return 2 * std::numbers::pi * r * std::pow(std::max(0.0, 1.0 - r * r / b), b / 2); }, 0.0,
            std::sqrt(b), 15, 1e-14);
        EXPECT_NEAR(maxwellian_normalization(b, 2), zb, 1e-12 * zb) << b;
    }
}

TEST(Maxwellian, PartialAndTotal) {
    const PartialMaxwellian m(4.0, 1);
    EXPECT_NEAR(integrate_ball_1d([&](double q) { return m.from_gap(1.0 - q * q / 4.0); }, 4.0), 1.0, 1e-13);
    const std::vector<double> edge{2.0}, outside{2.5};
    EXPECT_EQ(partial_maxwellian(edge, 4.0), 0.0);
    EXPECT_EQ(partial_maxwellian(outside, 4.0), 0.0);

    const auto k1 = make_spring_model({4.0}, 16);
    const std::vector<double> q1{0.7};
    EXPECT_DOUBLE_EQ(total_maxwellian(q1, k1), partial_maxwellian(q1, 4.0));

    const auto k2 = make_spring_model({4.0, 4.0}, 16);
    const std::vector<double> origin{0.0, 0.0};
    EXPECT_NEAR(total_maxwellian(origin, k2), std::pow(15.0 / 32.0, 2), 1e-15);
    EXPECT_NEAR(total_maxwellian(origin, k2), 0.2197266, 1e-7);
}

TEST(Maxwellian, LogGradientIdentity) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const auto model = make_spring_model({4.0, 7.0}, 16);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> q{0.97 * 2.0 * unit(rng), 0.97 * std::sqrt(7.0) * unit(rng)};
        const double M = total_maxwellian(q, model);
        for (int i = 0; i < 2; ++i) {
            const double b = model.b[i];
            const std::vector<double> qi{q[i]};
            const double analytic = fene_potential_derivative(0.5 * q[i] * q[i], b) * q[i];
            // M * d/dq_i (1/M) computed from the closed-form derivative of log M
            const double log_grad = q[i] / (1.0 - q[i] * q[i] / b);
            EXPECT_NEAR(log_grad, analytic, 1e-10 * std::max(1.0, std::abs(analytic)));
            const double step = 1e-6 * std::max(1.0, std::abs(q[i]));
            auto qp = q, qm = q;
            qp[i] += step;
            qm[i] -= step;
            const double fd = M * (1.0 / total_maxwellian(qp, model) - 1.0 / total_maxwellian(qm, model)) / (2 * step);
            EXPECT_NEAR(fd, analytic, 1e-6 * std::max(1.0, std::abs(analytic)));
        }
    }
}

TEST(Quadrature, RejectsLowOrder) {
    expect_code(ErrorCode::InvalidOrder, [] { build_quadrature(3, 4.0); });
    EXPECT_NO_THROW(build_quadrature(4, 4.0));
}

TEST(Quadrature, MomentsForFeneB4) {
    for (int n : {16, 24, 32, 64}) {
        const auto quad = build_quadrature(n, 4.0);
        double zero = 0.0, first = 0.0, second = 0.0, fourth = 0.0, kramers = 0.0;
        for (std::size_t m = 0; m < quad.size(); ++m) {
            const double q = quad.nodes[m];
            EXPECT_GT(quad.weights[m], 0.0);
            EXPECT_LT(std::abs(q), 2.0);
            zero += quad.mass[m];
            first += quad.mass[m] * q;
            second += quad.mass[m] * q * q;
            fourth += quad.mass[m] * q * q * q * q;
            kramers += quad.mass[m] * quad.force[m] * q * q;
        }
        EXPECT_NEAR(zero, 1.0, 1e-12) << n;
        EXPECT_NEAR(first, 0.0, 1e-14) << n;
        EXPECT_NEAR(second, 4.0 / 7.0, 1e-10) << n;
        // int q^4 M = (15/32) int q^4 (1 - q^2/4)^2 = 16/21
        EXPECT_NEAR(fourth, 16.0 / 21.0, 1e-10) << n;
        EXPECT_NEAR(kramers, 1.0, 1e-12) << n;
    }
}

TEST(Quadrature, AgreesWithIndependentIntegration) {
    for (double b : {2.5, 4.0, 8.0}) {
        const auto quad = build_quadrature(20, b);
        const PartialMaxwellian M(b, 1);
        for (int power : {2, 4, 6, 8}) {
            double sum = 0.0;
            for (std::size_t m = 0; m < quad.size(); ++m) sum += quad.weights[m] * M(quad.node(m)) * std::pow(quad.nodes[m], power);
            const double ref = integrate_ball_1d(
                [&](double q) { return std::pow(q, power) * M.from_gap(1.0 - q * q / b); }, b);
            EXPECT_NEAR(sum, ref, 1e-11 * ref) << "b=" << b << " p=" << power;
        }
    }
}

TEST(Quadrature, CellsCarryNodeMass) {
    for (double b : {2.5, 4.0, 8.0}) {
        const auto quad = build_quadrature(32, b);
        const PartialMaxwellian M(b, 1);
        for (std::size_t m = 0; m < quad.size(); ++m) {
            EXPECT_LT(quad.faces[m], quad.nodes[m]);
            EXPECT_LT(quad.nodes[m], quad.faces[m + 1]);
            const double cell = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                [&](double q) { return M.from_gap(1.0 - q * q / b); }, quad.faces[m], quad.faces[m + 1], 10, 1e-15);
            EXPECT_NEAR(cell, quad.mass[m], 1e-12) << m;
        }
        EXPECT_EQ(quad.face_maxwellian.front(), 0.0);
        EXPECT_EQ(quad.face_maxwellian.back(), 0.0);
    }
}

TEST(Quadrature, TwoDimensionalBall) {
    const auto quad = build_quadrature(16, 4.0, 2);
    double zero = 0.0, xx = 0.0, xy = 0.0, kxx = 0.0, kyy = 0.0;
    for (std::size_t m = 0; m < quad.size(); ++m) {
        const auto q = quad.node(m);
        EXPECT_LT(squared_norm(q), 4.0);
        zero += quad.mass[m];
        xx += quad.mass[m] * q[0] * q[0];
        xy += quad.mass[m] * q[0] * q[1];
        kxx += quad.mass[m] * quad.force[m] * q[0] * q[0];
        kyy += quad.mass[m] * quad.force[m] * q[1] * q[1];
    }
    EXPECT_NEAR(zero, 1.0, 1e-12);
    EXPECT_NEAR(xy, 0.0, 1e-14);
    // int |q|^2 M over the disc, b=4: radial oracle
    const double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [](double r) { return 2 * std::numbers::pi * r * r * r * std::pow(1.0 - r * r / 4.0, 2.0); }, 0.0, 2.0, 15,
        1e-15) / maxwellian_normalization(4.0, 2);
    EXPECT_NEAR(2.0 * xx, ref, 1e-12);
    EXPECT_NEAR(kxx, 1.0, 1e-12);
    EXPECT_NEAR(kyy, 1.0, 1e-12);
}

TEST(Rouse, DefaultAndValidation) {
    EXPECT_EQ(rouse_matrix(1)(0, 0), 2.0);
    const auto A = rouse_matrix(2);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
    EXPECT_NEAR(eig.eigenvalues()(0), 1.0, 1e-14);
    EXPECT_NEAR(eig.eigenvalues()(1), 3.0, 1e-14);
    EXPECT_EQ(A(0, 1), -1.0);
    Eigen::MatrixXd bad(2, 2);
    bad << 1, 2, 2, 1;
    expect_code(ErrorCode::RejectedMatrix, [&] { validate_rouse(bad); });
    Eigen::MatrixXd asym(2, 2);
    asym << 2, -1, 0, 2;
    expect_code(ErrorCode::RejectedMatrix, [&] { validate_rouse(asym); });
    expect_code(ErrorCode::RejectedMatrix, [&] { make_spring_model({4.0, 4.0}, 16, 1, bad); });
    expect_code(ErrorCode::InvalidArgument, [] { make_spring_model({1.5}, 16); });
}

TEST(Certification, PassFailAroundTwo) {
    for (double b : {2.5, 4.0, 8.0, 2.01, 30.0}) {
        const auto c = certify_potential(b);
        EXPECT_TRUE(c.passed) << b;
        EXPECT_TRUE(c.ratios_converged) << b;
        EXPECT_GT(c.c1, 0.0);
        EXPECT_GE(c.c2, c.c1);
        EXPECT_GT(c.c3, 0.0);
        EXPECT_GE(c.c4, c.c3);
        EXPECT_TRUE(std::isfinite(c.moment_bound));
    }
    for (double b : {1.5, 2.0, 0.5}) EXPECT_FALSE(certify_potential(b).passed) << b;
    EXPECT_EQ(certify_potential(4.0).theta, 2.0);
}

TEST(Certification, ConstantsBoundTheRatios) {
    const double b = 4.0;
    const auto c = certify_potential(b);
    const PartialMaxwellian M(b, 1);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double dist = 2.0 * std::pow(unit(rng), 4.0) + 1e-12;
        const double gap = dist * (4.0 - dist) / b;  // 1 - |q|^2/b without cancellation
        const double m = M.from_gap(gap);
        EXPECT_GE(m, (1 - 1e-7) * c.c1 * std::pow(dist, 2.0));
        EXPECT_LE(m, (1 + 1e-7) * c.c2 * std::pow(dist, 2.0));
        const double du = dist / gap;
        // constants are fitted to the ladder stabilisation tolerance (1e-8)
        EXPECT_GE(du, (1 - 1e-7) * c.c3);
        EXPECT_LE(du, (1 + 1e-7) * c.c4);
    }
}

TEST(Certification, MomentBoundOracle) {
    for (double b : {2.5, 4.0, 8.0}) {
        const PartialMaxwellian M(b, 1);
        // substitute q = sqrt(b) sin(t) to remove the log endpoint behaviour
        const double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [&](double t) {
                const double c = std::cos(t);
                const double gap = c * c;
                if (gap <= 0.0) return 0.0;
                const double U = -0.5 * b * std::log(gap);
                return std::sqrt(b) * c * (1.0 + U * U) * M.from_gap(gap);
            },
            -std::numbers::pi / 2, std::numbers::pi / 2, 20, 1e-14);
        EXPECT_NEAR(certify_potential(b).moment_bound, ref, 1e-9 * ref) << b;
    }
}
