#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "grelax/family_estimates.hpp"
#include "grelax/gheat_pde.hpp"
#include "grelax/path_engine.hpp"

using namespace grelax;

namespace {

const VolatilityBand kBand(0.5, 1.0);

double sample_variance(const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

}  // namespace

TEST(Noise, DeterministicInSeedAndShape) {
    const TimeGrid grid(1.0, 16);
    const auto a = generate_noise(42, 100, grid);
    const auto b = generate_noise(42, 100, grid);
    EXPECT_EQ(a.increments, b.increments);
    const auto c = generate_noise(43, 100, grid);
    EXPECT_NE(a.increments(0, 0), c.increments(0, 0));
    // per-path streams: a larger bundle extends a smaller one
    const auto d = generate_noise(42, 150, grid);
    for (std::size_t k = 0; k < 16; ++k) EXPECT_EQ(a.increments(99, k), d.increments(99, k));
    EXPECT_THROW(generate_noise(1, 0, grid), Error);
}

TEST(Noise, SampleMeanWithinCltBound) {
    const std::size_t m = 100000, n = 100;
    const auto nb = generate_noise(2026, m, TimeGrid(1.0, n));
    const double mean = pairwise_sum(nb.increments.flat()) / static_cast<double>(m * n);
    EXPECT_LE(std::abs(mean), 4.0 / std::sqrt(static_cast<double>(m * n)));
    double sq = 0.0;
    for (double z : nb.increments.flat()) sq += z * z;
    EXPECT_NEAR(sq / static_cast<double>(m * n), 1.0, 4.0 * std::sqrt(2.0 / static_cast<double>(m * n)));
}

TEST(GBrownian, QuadraticVariationInvariants) {
    const TimeGrid grid(1.0, 64);
    const auto noise = generate_noise(1, 500, grid);
    std::vector<VolatilityScenario> scs{VolatilityScenario::constant(kBand, grid, 1.0),
                                        VolatilityScenario::piecewise(kBand, grid, {0.5, 1.0, 0.75, 0.6})};
    const auto surface = solve_gheat([](double x) { return std::cos(2 * x); }, kBand,
                                     PdeGrid::padded(0.0, 120, 1.0, kBand));
    scs.push_back(extract_worst_case_scenario(surface, grid));
    for (const auto& sc : scs) {
        const auto ps = generate_gbm(noise, sc);
        for (std::size_t p = 0; p < ps.m_paths(); ++p) {
            EXPECT_EQ(ps.b_paths(p, 0), 0.0);
            EXPECT_EQ(ps.qv_paths(p, 0), 0.0);
            for (std::size_t k = 0; k < 64; ++k) {
                const double s = ps.sigma_used(p, k);
                EXPECT_TRUE(kBand.contains(s));
                EXPECT_EQ(ps.qv_paths(p, k + 1), ps.qv_paths(p, k) + s * s * grid.dt());
                EXPECT_GE(ps.qv_paths(p, k + 1), ps.qv_paths(p, k));
                const double t = grid.node(k + 1);
                EXPECT_GE(ps.qv_paths(p, k + 1), 0.25 * t - 1e-12);
                EXPECT_LE(ps.qv_paths(p, k + 1), 1.0 * t + 1e-12);
            }
        }
    }
    // constant sigma = 1 with a dyadic step: <B>_T = 1 exactly
    const auto ps = generate_gbm(noise, scs[0]);
    for (std::size_t p = 0; p < ps.m_paths(); ++p) EXPECT_EQ(ps.qv_paths(p, 64), 1.0);
}

TEST(GBrownian, GridAndBandErrors) {
    const auto noise = generate_noise(1, 10, TimeGrid(1.0, 8));
    EXPECT_THROW(generate_gbm(noise, VolatilityScenario::constant(kBand, TimeGrid(1.0, 4), 1.0)), Error);
}

TEST(GBrownian, SingletonBandVarianceAndCenteredFamily) {
    const std::size_t m = 100000;
    const TimeGrid grid(1.0, 50);
    const auto noise = generate_noise(8, m, grid);
    const VolatilityBand single(0.8, 0.8);
    const auto ps = generate_gbm(noise, VolatilityScenario::constant(single, grid, 0.8));
    std::vector<double> bt(m);
    for (std::size_t p = 0; p < m; ++p) bt[p] = terminal_value(ps, p);
    const double target = 0.64;
    EXPECT_NEAR(sample_variance(bt), target, 3.0 * std::sqrt(2.0 / m) * target);

    const auto fam = ScenarioFamily(kBand, {VolatilityScenario::constant(kBand, grid, 0.5),
                                            VolatilityScenario::constant(kBand, grid, 1.0),
                                            VolatilityScenario::piecewise(kBand, grid, {1.0, 0.5})});
    const auto est = estimate_expectation(terminal_value, fam, noise);
    EXPECT_NEAR(est.value, 0.0, 3.0 * est.se);
}

TEST(GIntegral, ElementaryCases) {
    const TimeGrid grid(1.0, 20);
    const auto noise = generate_noise(4, 300, grid);
    const auto ps = generate_gbm(noise, VolatilityScenario::piecewise(kBand, grid, {0.5, 1.0}));
    const auto zero = g_integral(Matrix(300, 20, 0.0), ps);
    for (double v : zero) EXPECT_EQ(v, 0.0);
    const auto one = g_integral(Matrix(300, 20, 1.0), ps);
    for (std::size_t p = 0; p < 300; ++p) EXPECT_NEAR(one[p], terminal_value(ps, p), 1e-12);
    EXPECT_THROW(g_integral(Matrix(300, 19, 1.0), ps), Error);
    EXPECT_THROW(qv_integral(Matrix(299, 20, 1.0), ps), Error);

    // each scenario's integral is the ordinary Ito sum of eta sigma sqrt(dt) Z
    Matrix eta(300, 20);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    for (std::size_t p = 0; p < 300; ++p)
        for (std::size_t k = 0; k < 20; ++k) eta(p, k) = nd(rng);
    const auto gi = g_integral(eta, ps);
    for (std::size_t p = 0; p < 300; ++p) {
        double ito = 0.0;
        for (std::size_t k = 0; k < 20; ++k)
            ito += eta(p, k) * ps.sigma_used(p, k) * std::sqrt(grid.dt()) * noise.increments(p, k);
        EXPECT_NEAR(gi[p], ito, 1e-12);
    }
}

TEST(GIntegral, LinearInIntegrand) {
    const TimeGrid grid(1.0, 16);
    const auto ps = generate_gbm(generate_noise(6, 200, grid), VolatilityScenario::constant(kBand, grid, 0.75));
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int trial = 0; trial < 25; ++trial) {
        Matrix e1(200, 16), e2(200, 16), comb(200, 16);
        const double a = u(rng), b = u(rng);
        for (std::size_t p = 0; p < 200; ++p)
            for (std::size_t k = 0; k < 16; ++k) {
                e1(p, k) = u(rng);
                e2(p, k) = u(rng);
                comb(p, k) = a * e1(p, k) + b * e2(p, k);
            }
        const auto g1 = g_integral(e1, ps), g2 = g_integral(e2, ps), gc = g_integral(comb, ps);
        const auto q1 = qv_integral(e1, ps), q2 = qv_integral(e2, ps), qc = qv_integral(comb, ps);
        for (std::size_t p = 0; p < 200; ++p) {
            EXPECT_NEAR(gc[p], a * g1[p] + b * g2[p], 1e-12);
            EXPECT_NEAR(qc[p], a * q1[p] + b * q2[p], 1e-12);
        }
    }
}

TEST(GIntegral, DiscreteItoIdentity) {
    const std::size_t m = 100000;
    const TimeGrid grid(1.0, 50);
    const VolatilityBand single(1.0, 1.0);
    const auto ps = generate_gbm(generate_noise(10, m, grid), VolatilityScenario::constant(single, grid, 1.0));
    const Matrix eta = path_value_process()(ps);
    const auto ibb = g_integral(eta, ps);
    std::vector<double> diff(m);
    for (std::size_t p = 0; p < m; ++p) {
        const double bt = terminal_value(ps, p);
        double sq = 0.0;
        for (std::size_t k = 0; k < 50; ++k) sq += std::pow(ps.b_paths(p, k + 1) - ps.b_paths(p, k), 2);
        // exact per path up to rounding: B_T^2 = 2 sum B_k dB_k + sum dB_k^2
        EXPECT_NEAR(bt * bt, 2.0 * ibb[p] + sq, 1e-12 * (1.0 + bt * bt));
        diff[p] = (2.0 * ibb[p] + 1.0) - bt * bt;
    }
    const auto d = mean_and_se(diff);
    EXPECT_NEAR(d.mean, 0.0, 3.0 * d.se);
}

TEST(GIntegral, RealizedVarianceConvergesAtHalfOrder) {
    std::vector<double> dts, errs;
    for (std::size_t n : {16u, 64u, 256u}) {
        const TimeGrid grid(1.0, n);
        const auto ps = generate_gbm(generate_noise(77, 20000, grid), VolatilityScenario::constant(kBand, grid, 0.8));
        double ms = 0.0;
        for (std::size_t p = 0; p < ps.m_paths(); ++p) {
            double rv = 0.0;
            for (std::size_t k = 0; k < n; ++k) rv += std::pow(ps.b_paths(p, k + 1) - ps.b_paths(p, k), 2);
            ms += std::pow(rv - ps.qv_paths(p, n), 2);
        }
        dts.push_back(grid.dt());
        errs.push_back(std::sqrt(ms / static_cast<double>(ps.m_paths())));
    }
    const double slope = loglog_slope(dts, errs);
    EXPECT_NEAR(slope, 0.5, 0.05);
    // L2 error of realized variance is sigma^2 sqrt(2 T dt)
    EXPECT_NEAR(errs.back(), 0.64 * std::sqrt(2.0 / 256.0), 0.03 * 0.64 * std::sqrt(2.0 / 256.0));
}

TEST(QvIntegral, ClosedForms) {
    const std::size_t n = 40;
    const TimeGrid grid(2.0, n);
    const double s = 0.75;
    const auto ps = generate_gbm(generate_noise(1, 50, grid), VolatilityScenario::constant(kBand, grid, s));
    const auto ones = qv_integral(Matrix(50, n, 1.0), ps);
    const auto zeros = qv_integral(Matrix(50, n, 0.0), ps);
    Matrix tk(50, n);
    for (std::size_t p = 0; p < 50; ++p)
        for (std::size_t k = 0; k < n; ++k) tk(p, k) = grid.node(k);
    const auto riemann = qv_integral(tk, ps);
    const double dt = grid.dt();
    const double closed = s * s * dt * dt * static_cast<double>(n * (n - 1)) / 2.0;
    for (std::size_t p = 0; p < 50; ++p) {
        EXPECT_NEAR(ones[p], s * s * 2.0, 1e-13);
        EXPECT_EQ(zeros[p], 0.0);
        EXPECT_NEAR(riemann[p], closed, 1e-13);
    }
}

TEST(Isometry, DeterministicIntegrands) {
    const std::size_t m = 100000, n = 20;
    const TimeGrid grid(1.0, n);
    const auto noise = generate_noise(21, m, grid);
    const auto fam = ScenarioFamily::constants(kBand, grid, {0.5, 0.75, 1.0});
    const auto one = check_isometry(deterministic_process(std::vector<double>(n, 1.0)), fam, noise);
    EXPECT_NEAR(one.rhs, 1.0, 1e-12);
    EXPECT_LE(one.rel_err, 3.0 / std::sqrt(static_cast<double>(m)));

    const auto zero = check_isometry(deterministic_process(std::vector<double>(n, 0.0)), fam, noise);
    EXPECT_EQ(zero.lhs, 0.0);
    EXPECT_EQ(zero.rhs, 0.0);

    std::vector<double> half(n, 0.0);
    for (std::size_t k = 0; k < n / 2; ++k) half[k] = 1.0;
    const VolatilityBand single(1.0, 1.0);
    const auto fam1 = ScenarioFamily::constants(single, grid, {1.0});
    const auto h = check_isometry(deterministic_process(half), fam1, noise);
    EXPECT_NEAR(h.rhs, 0.5, 1e-12);
}

TEST(Bdg, DoobBoundAndErrors) {
    const std::size_t n = 50;
    const TimeGrid grid(1.0, n);
    const auto noise = generate_noise(31, 20000, grid);
    const VolatilityBand single(1.0, 1.0);
    const auto fam1 = ScenarioFamily::constants(single, grid, {1.0});

    const auto z = check_bdg(deterministic_process(std::vector<double>(n, 0.0)), 2.0, fam1, noise);
    EXPECT_EQ(z.lhs, 0.0);
    EXPECT_EQ(z.rhs, 0.0);
    EXPECT_TRUE(z.holds);

    const auto r = check_bdg(deterministic_process(std::vector<double>(n, 1.0)), 2.0, fam1, noise);
    EXPECT_TRUE(r.holds);
    EXPECT_LE(r.ratio, 4.0);
    EXPECT_GT(r.ratio, 1.0);  // the running max exceeds the terminal value

    const auto surface = solve_gheat([](double x) { return std::cos(2 * x); }, kBand,
                                     PdeGrid::padded(0.0, 120, 1.0, kBand));
    const ScenarioFamily fam(kBand, {VolatilityScenario::constant(kBand, grid, 0.5),
                                     VolatilityScenario::constant(kBand, grid, 1.0),
                                     extract_worst_case_scenario(surface, grid)},
                             true);
    const auto f = check_bdg(deterministic_process(std::vector<double>(n, 1.0)), 2.0, fam, noise);
    EXPECT_TRUE(f.holds);
    EXPECT_TRUE(check_bdg(path_value_process(), 4.0, fam, noise).holds);
    EXPECT_THROW(check_bdg(path_value_process(), 3.0, fam, noise), Error);
}
