#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "grelax/optimizer.hpp"

using namespace grelax;

namespace {

const VolatilityBand kBand(0.5, 1.0);

auto zero3 = [](double, double, double) { return 0.0; };
auto zero2 = [](double, double) { return 0.0; };
auto action_drift = [](double, double, double a) { return a; };
auto square_running = [](double, double x, double) { return x * x; };
auto zero_terminal = [](double) { return 0.0; };
auto eps_diffusion = [](double, double) { return 0.1; };

}  // namespace

TEST(BruteForce, ControlIndependentCostReturnsFirst) {
    const TimeGrid g(1.0, 3);
    const auto noise = generate_noise(1, 10, g);
    const auto fam = ScenarioFamily::constants(kBand, g, {0.5, 1.0});
    const ActionSet U({-1.0, 0.0, 1.0});
    const auto r = brute_force_strict(CostSpec{[](double, double, double) { return 0.25; }, zero_terminal, 1.0},
                                      GsdeSpec{zero3, eps_diffusion, zero3, 0.0, 1.0, 0.0}, U, g, fam, noise);
    EXPECT_EQ(r.control.action_index(), (std::vector<std::size_t>{0, 0, 0}));
    EXPECT_EQ(r.enumerated, 27u);
    EXPECT_EQ(r.cost.value, 0.25);
}

TEST(BruteForce, DeterministicAlternatingOptimum) {
    const TimeGrid g(1.0, 4);
    const auto noise = generate_noise(2, 4, g);
    const auto fam = ScenarioFamily::constants(kBand, g, {1.0});
    const ActionSet U({-1.0, 1.0});
    const auto r = brute_force_strict(CostSpec{square_running, zero_terminal, 10.0},
                                      GsdeSpec{action_drift, zero2, zero3, 0.0, 1.0, 0.0}, U, g, fam, noise);
    // independent oracle: enumerate all 16 sign sequences by hand
    double best = INFINITY;
    std::vector<std::size_t> arg;
    for (unsigned mask = 0; mask < 16; ++mask) {
        std::vector<std::size_t> idx(4);
        double x = 0.0, j = 0.0;
        for (std::size_t k = 0; k < 4; ++k) {
            idx[k] = (mask >> (3 - k)) & 1u;
            j += x * x * 0.25;
            x += (idx[k] ? 1.0 : -1.0) * 0.25;
        }
        if (j < best) {
            best = j;
            arg = idx;
        }
    }
    EXPECT_EQ(r.control.action_index(), arg);
    // the last action never enters the left-endpoint running cost, so the tie goes lexicographically
    EXPECT_EQ(r.control.action_index(), (std::vector<std::size_t>{0, 1, 0, 0}));
    EXPECT_NEAR(r.cost.value, best, 1e-15);
    EXPECT_NEAR(best, 2.0 * std::pow(0.25, 3), 1e-15);
}

TEST(BruteForce, SingletonActionAndGuard) {
    const TimeGrid g(1.0, 5);
    const auto noise = generate_noise(3, 10, g);
    const auto fam = ScenarioFamily::constants(kBand, g, {1.0});
    const GsdeSpec spec{action_drift, eps_diffusion, zero3, 0.0, 1.0, 0.0};
    const CostSpec cost{square_running, zero_terminal, 10.0};
    const auto r = brute_force_strict(cost, spec, ActionSet({0.3}), g, fam, noise);
    EXPECT_EQ(r.enumerated, 1u);
    const TimeGrid big(1.0, 21);
    try {
        brute_force_strict(cost, spec, ActionSet({-1.0, 0.0, 1.0}), big,
                           ScenarioFamily::constants(kBand, big, {1.0}), generate_noise(3, 2, big));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::instance_too_large);
        EXPECT_STREQ(e.what(), "instance too large");
    }
}

TEST(SimplexGrid, CountsAndSums) {
    EXPECT_EQ(simplex_grid(2, 4).size(), 5u);
    EXPECT_EQ(simplex_grid(3, 4).size(), 15u);
    for (const auto& row : simplex_grid(3, 4)) EXPECT_DOUBLE_EQ(row[0] + row[1] + row[2], 1.0);
    EXPECT_EQ(simplex_grid(2, 2).front(), (std::vector<double>{0.0, 1.0}));
}

TEST(OptimizeRelaxed, AffineObjectiveOptimumAtVertex) {
    const TimeGrid g(1.0, 4);
    const auto noise = generate_noise(4, 200, g);
    const auto fam = ScenarioFamily::constants(kBand, g, {0.75});
    const ActionSet U({-1.0, 0.0, 1.0});
    const GsdeSpec spec{zero3, [](double, double) { return 1.0; }, zero3, 0.0, 1.0, 0.0};
    const CostSpec cost{[](double t, double x, double a) { return std::min(x * x, 4.0) * a + (t - 0.5) * a; },
                        zero_terminal, 10.0};
    const RobustEvaluator eval(cost, spec, U, fam, noise);
    const auto strict = brute_force_strict(eval, g);
    const auto relaxed = optimize_relaxed(eval, g);
    EXPECT_NEAR(relaxed.value, strict.cost.value, 2.0 * std::hypot(relaxed.se, strict.cost.se));
    EXPECT_LE(relaxed.value, strict.cost.value + 1e-12);
    for (double w : relaxed.control.weights().flat()) EXPECT_TRUE(w == 0.0 || w == 1.0);
}

TEST(OptimizeRelaxed, DriftCancellationFindsHalfRows) {
    const TimeGrid coarse(1.0, 4), fine(1.0, 64);
    const auto noise = generate_noise(5, 500, fine);
    const auto fam = ScenarioFamily::constants(kBand, fine, {0.5, 1.0});
    const ActionSet U({-1.0, 1.0});
    const CostSpec cost{square_running, zero_terminal, 10.0};
    const GsdeSpec spec{action_drift, eps_diffusion, zero3, 0.0, 1.0, 0.0};
    const RobustEvaluator eval(cost, spec, U, fam, noise);
    const auto r = optimize_relaxed(eval, coarse);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(r.control.weights()(k, 0), 0.5, 0.13);
    const double target = 0.01 * 1.0 / 2.0;
    EXPECT_NEAR(r.value, target, 0.1 * target + 3.0 * r.se);
    EXPECT_FALSE(r.budget_exhausted);
    const auto strict = brute_force_strict(eval, coarse);
    EXPECT_GT(strict.cost.value, r.value + 3.0 * std::hypot(strict.cost.se, r.se));
}

TEST(OptimizeRelaxed, FixpointBudgetAndBookkeeping) {
    const TimeGrid g(1.0, 3);
    const auto noise = generate_noise(6, 50, g);
    const auto fam = ScenarioFamily::constants(kBand, g, {0.5, 1.0});
    const ActionSet U({0.0, 1.0});
    // cost a: the first action is optimal everywhere
    const CostSpec cost{[](double, double, double a) { return a; }, zero_terminal, 1.0};
    const GsdeSpec spec{zero3, eps_diffusion, zero3, 0.0, 1.0, 0.0};
    const RobustEvaluator eval(cost, spec, U, fam, noise);
    const auto start = embed_strict(StrictControl(g, {0, 0, 0}), U);
    const auto r = optimize_relaxed(eval, g, {}, start);
    EXPECT_EQ(r.control, start);
    EXPECT_EQ(r.value, 0.0);

    OptimizerOptions tight;
    tight.budget = 3;
    const auto b = optimize_relaxed(eval, g, tight, embed_strict(StrictControl(g, {1, 1, 1}), U));
    EXPECT_TRUE(b.budget_exhausted);
    EXPECT_EQ(b.evaluations, 3u);

    // never above any scanned vertex: here every vertex of the simplex grid rows
    const auto full = optimize_relaxed(eval, g);
    for (std::size_t mask = 0; mask < 8; ++mask) {
        const StrictControl v(g, {mask & 1u, (mask >> 1) & 1u, (mask >> 2) & 1u});
        EXPECT_LE(full.value, eval(v).value);
    }
}

TEST(PerScenarioMinimizer, SingletonFamilyAgreesAndDualityHolds) {
    const TimeGrid coarse(1.0, 2), fine(1.0, 32);
    const auto noise = generate_noise(7, 300, fine);
    const ActionSet U({-1.0, 1.0});
    const GsdeSpec spec{action_drift, eps_diffusion, zero3, 0.0, 1.0, 0.0};
    const CostSpec cost{square_running, zero_terminal, 10.0};
    const auto sc = VolatilityScenario::constant(kBand, fine, 0.5);
    const auto a = per_scenario_minimizer(cost, spec, U, coarse, sc, noise);
    const auto b = optimize_relaxed(cost, spec, U, coarse, ScenarioFamily(kBand, {sc}), noise);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.control, b.control);
    EXPECT_NEAR(a.value, 0.01 * 0.25 / 2.0, 0.1 * 0.01 * 0.25 / 2.0 + 3.0 * a.se);

    const RobustEvaluator eval(cost, spec, U, ScenarioFamily::constants(kBand, fine, {0.5, 1.0}), noise);
    EXPECT_THROW(per_scenario_minimizer(eval, 2, coarse), Error);
}

TEST(GapReport, SingletonActionHasZeroGap) {
    const TimeGrid coarse(1.0, 2), fine(1.0, 16);
    const auto noise = generate_noise(8, 100, fine);
    const auto rep = gap_report(CostSpec{square_running, zero_terminal, 10.0},
                                GsdeSpec{action_drift, eps_diffusion, zero3, 0.0, 1.0, 0.0}, ActionSet({0.2}), coarse,
                                ScenarioFamily::constants(kBand, fine, {0.5, 1.0}), noise, {2, 4});
    EXPECT_EQ(rep.gap, 0.0);
    EXPECT_TRUE(rep.weak_duality);
    EXPECT_TRUE(rep.vertex_dominance);
}

TEST(GapReport, ConvexInActionBenchmark) {
    const TimeGrid coarse(1.0, 3), fine(1.0, 54);
    const auto noise = generate_noise(9, 300, fine);
    const auto rep = gap_report(CostSpec{[](double, double x, double a) { return x * x + 0.5 * a * a; }, zero_terminal,
                                         10.0},
                                GsdeSpec{action_drift, eps_diffusion, zero3, 0.0, 1.0, 0.0},
                                ActionSet({-1.0, 0.0, 1.0}), coarse, ScenarioFamily::constants(kBand, fine, {0.5, 1.0}),
                                noise, {2, 6}, {}, 99);
    EXPECT_LE(std::abs(rep.gap), 2.0 * rep.gap_se);
    EXPECT_TRUE(rep.weak_duality);
    EXPECT_TRUE(rep.vertex_dominance);
    ASSERT_TRUE(rep.fresh_strict.has_value());
    EXPECT_EQ(rep.fresh_strict->seed, 99u);
}

TEST(GapReport, DriftCancellationBenchmark) {
    const TimeGrid coarse(1.0, 4), fine(1.0, 256);
    const auto noise = generate_noise(10, 600, fine);
    const auto rep = gap_report(CostSpec{square_running, zero_terminal, 10.0},
                                GsdeSpec{action_drift, eps_diffusion, zero3, 0.0, 1.0, 0.0}, ActionSet({-1.0, 1.0}),
                                coarse, ScenarioFamily::constants(kBand, fine, {0.5, 1.0}), noise, {2, 4, 8, 16, 32});
    EXPECT_GT(rep.gap, 3.0 * rep.gap_se);
    EXPECT_TRUE(rep.vertex_dominance);
    EXPECT_TRUE(rep.chattering_approaches);
    EXPECT_TRUE(rep.weak_duality);
    EXPECT_LE(rep.sup_inf, rep.inf_sup);
    ASSERT_EQ(rep.chattering_curve.size(), 5u);
    EXPECT_LT(rep.chattering_curve.back().diff, rep.chattering_curve.front().diff);
}
