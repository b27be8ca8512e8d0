#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fenecongest/stress.hpp"

using namespace fenecongest;

namespace {

ConfigDistribution random_psi(std::size_t nx, std::size_t nc, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 2.0);
    ConfigDistribution p(nx, nc);
    for (double& v : p.values) v = unit(rng);
    return p;
}

}  // namespace

TEST(PolymerDensity, Basics) {
    const auto model = make_spring_model({4.0}, 16);
    const std::size_t nx = 12;
    EXPECT_NEAR(polymer_density(ConfigDistribution(nx, 16, 1.0), model)[5], 1.0, 1e-14);
    EXPECT_EQ(polymer_density(ConfigDistribution(nx, 16, 0.0), model)[3], 0.0);
    ConfigDistribution p(nx, 16);
    for (std::size_t j = 0; j < nx; ++j)
        for (std::size_t m = 0; m < 16; ++m) p(j, m) = 1.0 + 0.5 * std::cos(2 * std::numbers::pi * (j + 0.5) / nx);
    const auto eta = polymer_density(p, model);
    for (std::size_t j = 0; j < nx; ++j)
        EXPECT_NEAR(eta[j], 1.0 + 0.5 * std::cos(2 * std::numbers::pi * (j + 0.5) / nx), 1e-14);
    EXPECT_THROW(polymer_density(ConfigDistribution(nx, 15, 1.0), model), Error);
}

TEST(KramersMoment, EquilibriumIdentity) {
    for (int n : {16, 32, 48}) {
        for (double b : {2.5, 4.0, 8.0}) {
            const auto model = make_spring_model({b}, n);
            for (auto rule : {KramersRule::Cell, KramersRule::Gauss}) {
                const auto C = kramers_moment(ConfigDistribution(4, n, 1.0), model, 0, rule);
                for (double c : C) EXPECT_NEAR(c, 1.0, 1e-12) << n << " " << b;
                const auto C2 = kramers_moment(ConfigDistribution(4, n, 2.0), model, 0, rule);
                for (double c : C2) EXPECT_NEAR(c, 2.0, 2e-12);
                const auto C0 = kramers_moment(ConfigDistribution(4, n, 0.0), model, 0, rule);
                for (double c : C0) EXPECT_EQ(c, 0.0);
            }
        }
    }
}

TEST(KramersMoment, TwoSpringsAndTwoDimensions) {
    const auto model = make_spring_model({4.0, 6.0}, 16);
    for (int i = 0; i < 2; ++i) {
        const auto C = kramers_moment(ConfigDistribution(3, 256, 1.0), model, i);
        for (double c : C) EXPECT_NEAR(c, 1.0, 1e-12);
    }
    EXPECT_THROW(kramers_moment(ConfigDistribution(3, 256, 1.0), model, 2), Error);
    const auto model2 = make_spring_model({4.0}, 16, 2);
    const auto C = kramers_moment(ConfigDistribution(2, model2.n_config(), 1.0), model2, 0);
    ASSERT_EQ(C.size(), 8u);
    EXPECT_NEAR(C[0], 1.0, 1e-12);
    EXPECT_NEAR(C[1], 0.0, 1e-12);
    EXPECT_EQ(C[1], C[2]);
    EXPECT_NEAR(C[3], 1.0, 1e-12);
}

TEST(KramersMoment, CellAndGaussRulesAgreeForSmoothData) {
    // psi_hat = 1 + q^2: int U' q^2 (1 + q^2) M, both rules converge to the same value
    double prev_gap = 1.0;
    for (int n : {16, 32, 64}) {
        const auto model = make_spring_model({4.0}, n);
        ConfigDistribution p(1, n);
        for (int m = 0; m < n; ++m) p(0, m) = 1.0 + model.quadrature[0].nodes[m] * model.quadrature[0].nodes[m];
        const double cell = kramers_moment(p, model, 0, KramersRule::Cell)[0];
        const double gauss = kramers_moment(p, model, 0, KramersRule::Gauss)[0];
        const double gap = std::abs(cell - gauss);
        EXPECT_LT(gap, prev_gap);
        prev_gap = gap;
    }
    EXPECT_LT(prev_gap, 1e-2);
}

TEST(ExtraStress, EquilibriumAndScaling) {
    const auto model = make_spring_model({4.0}, 32);
    StressParams params;
    params.k = 1.0;
    params.xi = 1.0;
    const auto s = extra_stress(ConfigDistribution(8, 32, 1.0), model, params);
    for (std::size_t j = 0; j < 8; ++j) {
        EXPECT_NEAR(s.tau1_at(j), -1.0, 1e-12);
        EXPECT_NEAR(s.tau_at(j), -2.0, 1e-12);
        EXPECT_NEAR(s.eta[j], 1.0, 1e-14);
    }
    const auto zero = extra_stress(ConfigDistribution(8, 32, 0.0), model, params);
    for (double v : zero.tau) EXPECT_EQ(v, 0.0);

    const auto p = random_psi(8, 32, 5);
    ConfigDistribution p2 = p;
    for (double& v : p2.values) v *= 2.0;
    const auto a = extra_stress(p, model, params), b = extra_stress(p2, model, params);
    for (std::size_t j = 0; j < 8; ++j) {
        EXPECT_NEAR(b.tau1_at(j), 2.0 * a.tau1_at(j), 1e-12 * std::abs(a.tau1_at(j)) + 1e-14);
        const double xi_a = a.tau1_at(j) - a.tau_at(j), xi_b = b.tau1_at(j) - b.tau_at(j);
        EXPECT_NEAR(xi_b, 4.0 * xi_a, 1e-12 * xi_a);
    }
}

TEST(ExtraStress, LinearityAndSymmetry) {
    const auto model = make_spring_model({4.0}, 12, 2);
    StressParams params;
    params.k = 0.7;
    const std::size_t nc = model.n_config();
    const auto p = random_psi(5, nc, 1), q = random_psi(5, nc, 2);
    ConfigDistribution sum = p;
    for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] = 0.3 * p.values[i] + 1.7 * q.values[i];
    const auto sp = extra_stress(p, model, params), sq = extra_stress(q, model, params), ss = extra_stress(sum, model, params);
    for (std::size_t e = 0; e < ss.tau1.size(); ++e)
        EXPECT_NEAR(ss.tau1[e], 0.3 * sp.tau1[e] + 1.7 * sq.tau1[e], 1e-12);
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(ss.tau1_at(j, 0, 1), ss.tau1_at(j, 1, 0));
}

TEST(ExtraStress, TraceCoefficientOverride) {
    const auto model = make_spring_model({4.0, 4.0}, 16);
    StressParams params;
    EXPECT_EQ(params.trace_coefficient(2), 3.0);
    auto s = extra_stress(ConfigDistribution(2, 256, 1.0), model, params);
    EXPECT_NEAR(s.tau1_at(0), 2.0 - 3.0, 1e-12);
    params.c_eta = 4.0;
    s = extra_stress(ConfigDistribution(2, 256, 1.0), model, params);
    EXPECT_NEAR(s.tau1_at(0), 2.0 - 4.0, 1e-12);
}
