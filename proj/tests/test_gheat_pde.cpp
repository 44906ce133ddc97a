#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "grelax/gheat_pde.hpp"

using namespace grelax;

namespace {

const VolatilityBand kBand(0.5, 1.0);

double square(double x) { return x * x; }
double neg_square(double x) { return -x * x; }

}  // namespace

TEST(PdeGrid, StabilityGuard) {
    const PdeGrid bad(-1.0, 1.0, 100, 1.0, 10);
    EXPECT_FALSE(bad.is_stable(kBand));
    try {
        solve_gheat(square, kBand, bad);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::unstable_grid);
        EXPECT_STREQ(e.what(), "unstable grid");
    }
    const auto good = PdeGrid::stable(-1.0, 1.0, 100, 1.0, kBand);
    EXPECT_TRUE(good.is_stable(kBand));
    EXPECT_FALSE(PdeGrid(-1.0, 1.0, 100, 1.0, good.nt() - 1).is_stable(kBand));
}

TEST(SolveGheat, BadPayoff) {
    const auto g = PdeGrid::padded(0.0, 50, 1.0, kBand);
    try {
        solve_gheat([](double x) { return x > 0 ? std::nan("") : 0.0; }, kBand, g);
        FAIL();
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "bad payoff");
    }
}

TEST(SolveGheat, ConstantsPreservedExactly) {
    const auto g = PdeGrid::padded(0.0, 80, 1.0, kBand);
    const auto s = solve_gheat([](double) { return 0.3; }, kBand, g);
    for (double v : s.values.flat()) EXPECT_EQ(v, 0.3);
}

TEST(SolveGheat, QuadraticClosedForms) {
    const auto g = PdeGrid::padded(0.0, 400, 1.0, kBand);
    const auto up = solve_gheat(square, kBand, g);
    const auto down = solve_gheat(neg_square, kBand, g);
    EXPECT_NEAR(up.at(1.0, 0.0), 1.0, 1e-3);
    EXPECT_NEAR(down.at(1.0, 0.0), -0.25, 1e-3);
    EXPECT_NEAR(up.at(0.25, 0.0), 0.25, 1e-3);
    EXPECT_EQ(up.values(0, 200), 0.0);
}

TEST(SolveGheat, FeedbackIsBangBang) {
    const auto g = PdeGrid::padded(0.0, 200, 1.0, kBand);
    const auto up = solve_gheat(square, kBand, g);
    const auto down = solve_gheat(neg_square, kBand, g);
    for (double v : up.feedback.flat()) EXPECT_EQ(v, 1.0);
    for (double v : down.feedback.flat()) EXPECT_EQ(v, 0.5);
    const auto mixed = solve_gheat([](double x) { return std::cos(x); }, kBand, g);
    for (double v : mixed.feedback.flat()) EXPECT_TRUE(v == 0.5 || v == 1.0);
}

TEST(GnormalExpectation, ClosedForms) {
    const auto g = PdeGrid::padded(0.0, 400, 1.0, kBand);
    EXPECT_NEAR(gnormal_expectation([](double x) { return x; }, 1.0, 0.0, kBand, g), 0.0, 1e-12);
    EXPECT_NEAR(gnormal_expectation(square, 1.0, 0.0, kBand, g), 1.0, 1e-3);
    EXPECT_NEAR(gnormal_expectation(square, 0.25, 0.0, kBand, g), 0.25, 1e-3);
    EXPECT_THROW(gnormal_expectation(square, 1.5, 0.0, kBand, g), Error);
    EXPECT_THROW(gnormal_expectation(square, 1.0, 100.0, kBand, g), Error);
    EXPECT_THROW(gnormal_expectation(square, 0.0, 0.0, kBand, g), Error);
}

TEST(SolveGheat, SingletonBandIsClassicalHeat) {
    const VolatilityBand single(0.8, 0.8);
    const auto g = PdeGrid::padded(0.0, 300, 1.0, single);
    const auto s = solve_gheat([](double x) { return std::cos(x); }, single, g);
    for (double v : s.feedback.flat()) EXPECT_EQ(v, 0.8);
    // Gaussian convolution: E cos(x + s sqrt(t) Z) = cos(x) exp(-s^2 t / 2)
    for (double t : {0.25, 0.5, 1.0})
        for (double x : {-1.0, 0.0, 0.3, 2.0}) EXPECT_NEAR(s.at(t, x), std::cos(x) * std::exp(-0.32 * t), 1e-3);
}

TEST(SolveGheat, ComparisonAndHomogeneity) {
    const auto g = PdeGrid::padded(0.0, 60, 1.0, kBand);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = u(rng), b = u(rng), c = u(rng), bump = pos(rng), w = pos(rng) + 0.1;
        auto phi2 = [=](double x) { return a * std::sin(b * x) + c * std::cos(x); };
        auto phi1 = [=](double x) { return phi2(x) + bump * std::exp(-x * x / w); };
        const auto s1 = solve_gheat(phi1, kBand, g);
        const auto s2 = solve_gheat(phi2, kBand, g);
        for (std::size_t i = 0; i < s1.values.flat().size(); ++i)
            EXPECT_GE(s1.values.flat()[i], s2.values.flat()[i] - 1e-12);
        const double lam = 3.0 * pos(rng);
        const auto sl = solve_gheat([&](double x) { return lam * phi2(x); }, kBand, g);
        for (std::size_t i = 0; i < sl.values.flat().size(); ++i)
            EXPECT_NEAR(sl.values.flat()[i], lam * s2.values.flat()[i], 1e-12);
    }
}

TEST(SolveGheat, DominatesEveryConstantVolatility) {
    const auto g = PdeGrid::padded(0.0, 100, 1.0, kBand);
    auto phi = [](double x) { return std::sin(x) + 0.3 * std::abs(x); };
    const auto gs = solve_gheat(phi, kBand, g);
    for (double s : {0.5, 0.6, 0.75, 0.9, 1.0}) {
        const auto lin = solve_gheat(phi, VolatilityBand(s, s), g);
        for (std::size_t i = 0; i < gs.values.flat().size(); ++i)
            EXPECT_GE(gs.values.flat()[i], lin.values.flat()[i] - 1e-12);
    }
}

TEST(SolveGheat, RefinementConvergence) {
    // Quadratic payoffs: the central difference is exact, so the error is at rounding
    // level (better than first order) or, if visible, must decay with slope >= 0.9.
    std::vector<double> dxs, err_up, err_down;
    for (std::size_t nx : {100u, 200u, 400u}) {
        const auto g = PdeGrid::padded(0.0, nx, 1.0, kBand);
        dxs.push_back(g.dx());
        err_up.push_back(std::abs(solve_gheat(square, kBand, g).at(1.0, 0.0) - 1.0));
        err_down.push_back(std::abs(solve_gheat(neg_square, kBand, g).at(1.0, 0.0) + 0.25));
    }
    for (const auto* e : {&err_up, &err_down}) {
        const bool exact = *std::max_element(e->begin(), e->end()) <= 1e-9;
        EXPECT_TRUE(exact || loglog_slope(dxs, *e) >= 0.9);
        for (std::size_t i = 0; i < e->size(); ++i) EXPECT_LE((*e)[i], 1e-3);
    }

    // Smooth payoff with a closed form under a singleton band: genuine second order.
    const VolatilityBand single(1.0, 1.0);
    std::vector<double> errs;
    for (std::size_t nx : {100u, 200u, 400u}) {
        const auto g = PdeGrid::padded(0.0, nx, 1.0, single);
        errs.push_back(std::abs(solve_gheat([](double x) { return std::cos(x); }, single, g).at(1.0, 0.0) -
                                std::exp(-0.5)));
    }
    EXPECT_GE(loglog_slope(dxs, errs), 0.9);
}

TEST(WorstCaseScenario, ConvexConcaveAndSingleton) {
    const TimeGrid path_grid(1.0, 50);
    const auto g = PdeGrid::padded(0.0, 200, 1.0, kBand);
    const auto convex = extract_worst_case_scenario(solve_gheat(square, kBand, g), path_grid);
    ASSERT_EQ(convex.kind(), ScenarioKind::feedback);
    for (double v : convex.as_feedback()->sigma.flat()) EXPECT_EQ(v, 1.0);
    const auto concave = extract_worst_case_scenario(solve_gheat(neg_square, kBand, g), path_grid);
    for (double v : concave.as_feedback()->sigma.flat()) EXPECT_EQ(v, 0.5);

    const VolatilityBand single(0.7, 0.7);
    const auto sg = PdeGrid::padded(0.0, 200, 1.0, single);
    const auto sc = extract_worst_case_scenario(solve_gheat([](double x) { return std::sin(x); }, single, sg), path_grid);
    for (double v : sc.as_feedback()->sigma.flat()) EXPECT_EQ(v, 0.7);

    EXPECT_THROW(extract_worst_case_scenario(solve_gheat(square, kBand, g), TimeGrid(2.0, 10)), Error);
}

TEST(WorstCaseScenario, StateMapShiftsLookup) {
    // phi convex for x > 0 and concave for x < 0 near the origin at short horizon
    const auto g = PdeGrid::padded(0.0, 240, 0.05, kBand);
    const auto surf = solve_gheat([](double x) { return x * x * x; }, kBand, g);
    const TimeGrid path_grid(0.05, 5);
    const auto plain = extract_worst_case_scenario(surf, path_grid);
    const auto shifted = extract_worst_case_scenario(surf, path_grid, StateMap{2.0, 1.0});
    EXPECT_EQ(plain.sigma_at(0, -2.0), 0.5);
    EXPECT_EQ(plain.sigma_at(0, 2.0), 1.0);
    EXPECT_EQ(shifted.sigma_at(0, 0.0), 1.0);
    EXPECT_EQ(shifted.sigma_at(0, -4.0), 0.5);
}
