#pragma once

/**
 * @file acceptance.hpp
 * @brief The acceptance suite: nine checks with fixed instances and tolerances, shared
 *        by the `acceptance` test binary and `grelax verify`.
 *
 * Every check derives its noise from one master seed, so the JSON record of a run is a
 * deterministic function of that seed. Wall-clock times are reported on the side and
 * never enter the record.
 */

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "grelax/family_estimates.hpp"
#include "grelax/gheat_pde.hpp"
#include "grelax/gsde.hpp"
#include "grelax/optimizer.hpp"
#include "grelax/path_engine.hpp"
#include "grelax/registry.hpp"
#include "grelax/relaxed_control.hpp"
#include "grelax/robust_cost.hpp"
#include "grelax/scenario_family.hpp"

namespace grelax::acceptance {

using ordered_json = nlohmann::ordered_json;

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string summary;  ///< one-line human-readable outcome
    ordered_json data;    ///< the numbers behind the verdict
    double seconds = 0.0;
};

inline constexpr std::uint64_t default_seed = 12345;

namespace detail {

inline const VolatilityBand& band() {
    static const VolatilityBand b(0.5, 1.0);
    return b;
}

inline std::uint64_t sub_seed(std::uint64_t seed, int id) { return seed + 1000003ULL * static_cast<std::uint64_t>(id); }

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

/// Scenarios {0.5, 1.0, (1.0 then 0.5)} used by the control benchmarks.
inline ScenarioFamily benchmark_family(const TimeGrid& grid) {
    return ScenarioFamily(band(), {VolatilityScenario::constant(band(), grid, 0.5),
                                   VolatilityScenario::constant(band(), grid, 1.0),
                                   VolatilityScenario::piecewise(band(), grid, {1.0, 0.5})});
}

inline constexpr double epsilon = 0.1;

/// b = a, sigma = epsilon, gamma = 0.
inline auto drift_cancellation() {
    return GsdeSpec{[](double, double, double a) { return a; }, [](double, double) { return epsilon; },
                    [](double, double, double) { return 0.0; }, 0.0, 1.0, 0.0};
}

/// f = x^2 + w a^2, h = 0.
inline auto quadratic_cost(double action_weight) {
    return CostSpec{[action_weight](double, double x, double a) { return x * x + action_weight * a * a; },
                    [](double) { return 0.0; }, 100.0};
}

inline RelaxedControl half_half() { return RelaxedControl::constant(TimeGrid(1.0, 1), {0.5, 0.5}); }

/// Each row must satisfy diff <= 2 SE + C / n, and the last diff must not exceed `final_tol`.
/// Differences weakly decreasing in n up to 2 SE, the final one within 2 SE + C / n and
/// below `final_tol`.
inline bool cost_rows_converge(const std::vector<ChatteringPoint>& rows, double c, double final_tol) {
    if (rows.empty()) return false;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i].diff <= rows[i - 1].diff + 2.0 * rows[i].diff_se)) return false;
    const auto& last = rows.back();
    return last.diff <= 2.0 * last.diff_se + c / static_cast<double>(last.n) && last.diff <= final_tol;
}

/// Log-log slope of the differences against n; the rate is reported, not tested.
inline double diff_rate(const std::vector<ChatteringPoint>& rows) {
    std::vector<double> ns, ds;
    for (const auto& r : rows)
        if (r.diff > 0.0) {
            ns.push_back(static_cast<double>(r.n));
            ds.push_back(r.diff);
        }
    return ns.size() >= 2 ? loglog_slope(ns, ds) : std::numeric_limits<double>::quiet_NaN();
}

inline ordered_json curve_json(const std::vector<ChatteringPoint>& rows, double c) {
    ordered_json a = ordered_json::array();
    for (const auto& r : rows)
        a.push_back({{"n", r.n},
                     {"value", r.value},
                     {"se", r.se},
                     {"diff", r.diff},
                     {"diff_se", r.diff_se},
                     {"within_c_over_n", r.diff <= 2.0 * r.diff_se + c / static_cast<double>(r.n)}});
    return a;
}

}  // namespace detail

/// 1. PDE values of x^2 and -x^2 against closed forms; Monte Carlo under the extracted
///    worst-case feedback scenario against the PDE value.
inline CriterionResult g_normal_oracle(std::uint64_t seed) {
    const auto& band = detail::band();
    const PdeGrid pde = PdeGrid::padded(0.0, 400, 1.0, band);
    const TimeGrid path_grid(1.0, 200);
    const auto noise = generate_noise(detail::sub_seed(seed, 1), 100000, path_grid);
    CriterionResult r{1, "G-normal oracle agreement", true, "", ordered_json::array(), 0.0};
    std::string summary;
    const std::vector<std::pair<std::string, double>> cases{{"square", 1.0}, {"neg_square", -0.25}};
    for (const auto& [name, closed] : cases) {
        const Payoff phi = make_payoff(name);
        const auto surface = solve_gheat(phi, band, pde);
        const double u = surface.at(1.0, 0.0);
        const ScenarioFamily fam(band, {extract_worst_case_scenario(surface, path_grid)}, true);
        const auto est = estimate_expectation(
            [&](const GPathSet& ps, std::size_t p) { return phi(terminal_value(ps, p)); }, fam, noise);
        const bool pde_ok = std::abs(u - closed) <= 1e-3;
        const bool mc_ok = std::abs(est.value - u) <= 3.0 * est.se + 5e-3;
        r.pass = r.pass && pde_ok && mc_ok;
        r.data.push_back({{"payoff", name},
                          {"closed_form", closed},
                          {"pde", u},
                          {"pde_error", std::abs(u - closed)},
                          {"mc", est.value},
                          {"mc_se", est.se},
                          {"pde_ok", pde_ok},
                          {"mc_ok", mc_ok}});
        summary += name + ": pde " + detail::fmt(u) + ", mc " + detail::fmt(est.value) + " (se " + detail::fmt(est.se) +
                   ")  ";
    }
    r.summary = summary;
    return r;
}

/// 2. The four axioms, exactly, for 1000 random payoff pairs on a five-scenario family.
///    Payoffs are rounded to a 2^-24 lattice and clamped to [-64, 64], and m = 1024, so
///    every sum and mean the estimator forms is exact in double precision.
inline CriterionResult axiom_suite(std::uint64_t seed) {
    const auto& band = detail::band();
    const TimeGrid grid(1.0, 8);
    const auto surface = solve_gheat([](double x) { return std::cos(2.0 * x); }, band,
                                     PdeGrid::padded(0.0, 120, 1.0, band));
    const ScenarioFamily fam(band,
                             {VolatilityScenario::constant(band, grid, 0.5), VolatilityScenario::constant(band, grid, 0.75),
                              VolatilityScenario::constant(band, grid, 1.0),
                              VolatilityScenario::piecewise(band, grid, {1.0, 0.5}),
                              extract_worst_case_scenario(surface, grid)},
                             true);
    const auto sets = generate_family(generate_noise(detail::sub_seed(seed, 2), 1024, grid), fam);
    auto quantize = [](double v) { return std::ldexp(std::round(std::ldexp(std::clamp(v, -64.0, 64.0), 24)), -24); };
    auto e_hat = [&](const PathFunctional& xi) { return estimate_expectation(xi, sets).value; };

    std::mt19937_64 rng(detail::sub_seed(seed, 2));
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::uniform_int_distribution<int> quarter(0, 16);
    std::size_t bad_sub = 0, bad_mono = 0, bad_const = 0, bad_hom = 0;
    const std::size_t pairs = 1000;
    for (std::size_t i = 0; i < pairs; ++i) {
        const double a1 = coef(rng), b1 = coef(rng), c1 = coef(rng), a2 = coef(rng), b2 = coef(rng), c2 = coef(rng);
        const PathFunctional x = [=](const GPathSet& ps, std::size_t p) {
            const double bt = terminal_value(ps, p);
            return quantize(a1 * bt * bt + b1 * bt + c1 * ps.qv_paths(p, ps.grid.n_steps()));
        };
        const PathFunctional y = [=](const GPathSet& ps, std::size_t p) {
            double run_max = 0.0;
            for (double v : ps.b_paths.row(p)) run_max = std::max(run_max, v);
            return quantize(a2 * std::abs(terminal_value(ps, p)) + b2 * run_max + c2);
        };
        const double ex = e_hat(x), ey = e_hat(y);
        if (!(e_hat([&](const GPathSet& ps, std::size_t p) { return x(ps, p) + y(ps, p); }) <= ex + ey)) ++bad_sub;
        // x v y dominates both x and y path by path
        const double emax = e_hat([&](const GPathSet& ps, std::size_t p) { return std::max(x(ps, p), y(ps, p)); });
        if (!(emax >= ex && emax >= ey)) ++bad_mono;
        const double c = std::ldexp(std::round(std::ldexp(coef(rng), 12)), -12);
        if (e_hat([&](const GPathSet&, std::size_t) { return c; }) != c) ++bad_const;
        const double lam = std::ldexp(static_cast<double>(quarter(rng)), -2);
        if (e_hat([&](const GPathSet& ps, std::size_t p) { return lam * x(ps, p); }) != lam * ex) ++bad_hom;
    }
    CriterionResult r{2, "Sublinear-expectation axioms (exact)", false, "", {}, 0.0};
    r.pass = bad_sub + bad_mono + bad_const + bad_hom == 0;
    r.data = {{"pairs", pairs},
              {"scenarios", fam.size()},
              {"m_paths", 1024},
              {"subadditivity_violations", bad_sub},
              {"monotonicity_violations", bad_mono},
              {"constant_violations", bad_const},
              {"homogeneity_violations", bad_hom}};
    r.summary = std::to_string(pairs) + " pairs, violations: sub " + std::to_string(bad_sub) + ", mono " +
                std::to_string(bad_mono) + ", const " + std::to_string(bad_const) + ", hom " + std::to_string(bad_hom);
    return r;
}

inline ScenarioFamily isometry_family(const TimeGrid& grid) {
    const auto& band = detail::band();
    return ScenarioFamily(band, {VolatilityScenario::constant(band, grid, 0.5),
                                 VolatilityScenario::constant(band, grid, 1.0),
                                 VolatilityScenario::piecewise(band, grid, {1.0, 0.5}),
                                 VolatilityScenario::piecewise(band, grid, {0.5, 1.0}),
                                 VolatilityScenario::piecewise(band, grid, {0.5, 0.75, 1.0, 0.75, 0.5})});
}

/// 3. Isometry for 50 random deterministic step integrands: relative error <= 3 / sqrt(m).
inline CriterionResult isometry(std::uint64_t seed) {
    const std::size_t m = 100000;
    const TimeGrid grid(1.0, 50);
    const auto sets = generate_family(generate_noise(detail::sub_seed(seed, 3), m, grid), isometry_family(grid));
    const double tol = 3.0 / std::sqrt(static_cast<double>(m));
    std::mt19937_64 rng(detail::sub_seed(seed, 3));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CriterionResult r{3, "Isometry", true, "", {}, 0.0};
    ordered_json cases = ordered_json::array();
    double worst = 0.0;
    std::size_t failures = 0;
    for (int i = 0; i < 50; ++i) {
        std::vector<double> eta(grid.n_steps());
        for (double& v : eta) v = u(rng);
        const auto rep = check_isometry(deterministic_process(eta), sets);
        const bool ok = rep.rel_err <= tol;
        failures += ok ? 0 : 1;
        worst = std::max(worst, rep.rel_err);
        cases.push_back({{"lhs", rep.lhs}, {"rhs", rep.rhs}, {"rel_err", rep.rel_err}, {"ok", ok}});
    }
    r.pass = failures == 0;
    r.data = {{"m_paths", m}, {"tolerance", tol}, {"worst_rel_err", worst}, {"failures", failures}, {"cases", cases}};
    r.summary = "worst rel err " + detail::fmt(worst) + " vs tol " + detail::fmt(tol) + ", failures " +
                std::to_string(failures) + "/50";
    return r;
}

/// 4. BDG-type bound with p = 2 over 20 random integrands, family with worst-case feedback.
inline CriterionResult bdg(std::uint64_t seed) {
    const auto& band = detail::band();
    const TimeGrid grid(1.0, 50);
    const auto surface = solve_gheat([](double x) { return std::cos(2.0 * x); }, band,
                                     PdeGrid::padded(0.0, 200, 1.0, band));
    const ScenarioFamily fam(band,
                             {VolatilityScenario::constant(band, grid, 0.5), VolatilityScenario::constant(band, grid, 1.0),
                              VolatilityScenario::piecewise(band, grid, {1.0, 0.5}),
                              extract_worst_case_scenario(surface, grid)},
                             true);
    const auto sets = generate_family(generate_noise(detail::sub_seed(seed, 4), 20000, grid), fam);
    std::mt19937_64 rng(detail::sub_seed(seed, 4));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CriterionResult r{4, "BDG-type bound (p = 2)", true, "", {}, 0.0};
    ordered_json cases = ordered_json::array();
    double worst_ratio = 0.0;
    std::size_t failures = 0;
    for (int i = 0; i < 20; ++i) {
        AdaptedProcess eta;
        std::string kind;
        if (i % 2 == 0) {
            std::vector<double> v(grid.n_steps());
            for (double& x : v) x = u(rng);
            eta = deterministic_process(v);
            kind = "deterministic";
        } else {
            const double a = u(rng), w = 3.0 * u(rng), c = u(rng);
            eta = [=](const GPathSet& ps) {
                Matrix e(ps.m_paths(), ps.grid.n_steps());
                for (std::size_t p = 0; p < e.rows(); ++p)
                    for (std::size_t k = 0; k < e.cols(); ++k) e(p, k) = a * std::sin(w * ps.b_paths(p, k)) + c;
                return e;
            };
            kind = "path_dependent";
        }
        const auto rep = check_bdg(eta, 2.0, sets);
        failures += rep.holds ? 0 : 1;
        worst_ratio = std::max(worst_ratio, rep.ratio);
        cases.push_back(
            {{"kind", kind}, {"lhs", rep.lhs}, {"rhs", rep.rhs}, {"ratio", rep.ratio}, {"se", rep.se}, {"holds", rep.holds}});
    }
    r.pass = failures == 0;
    r.data = {{"constant", 4.0}, {"m_paths", 20000}, {"worst_ratio", worst_ratio}, {"failures", failures}, {"cases", cases}};
    r.summary = "worst lhs/rhs " + detail::fmt(worst_ratio) + " (C = 4), failures " + std::to_string(failures) + "/20";
    return r;
}

/// 5. Chattering pairing error decays with log-log slope <= -0.9.
inline CriterionResult chattering(std::uint64_t) {
    const ActionSet U({-1.0, 1.0});
    const std::vector<std::string> names = pairing_names();
    const std::vector<std::size_t> ns{2, 4, 8, 16, 32};
    const std::size_t refinement = 8;
    std::vector<PairingFunction> phis;
    for (const auto& n : names) phis.push_back(make_pairing(n));
    const auto st = chattering_convergence_study(detail::half_half(), U, phis, ns, refinement);
    // Summation rounding on the finest chattered grid: steps * eps * max |phi| * T.
    const std::size_t steps = ns.back() * U.size() * refinement;
    CriterionResult r{5, "Chattering convergence", true, "", ordered_json::array(), 0.0};
    for (std::size_t f = 0; f < names.size(); ++f) {
        double sup_phi = 0.0;
        for (std::size_t k = 0; k <= steps; ++k)
            for (double a : U.values())
                sup_phi = std::max(sup_phi, std::abs(phis[f](static_cast<double>(k) / static_cast<double>(steps), a)));
        const double floor = static_cast<double>(steps) * std::numeric_limits<double>::epsilon() * sup_phi;
        const bool exact_zero =
            std::all_of(st.errors[f].begin(), st.errors[f].end(), [&](double e) { return e <= floor; });
        const bool ok = st.slopes[f] <= -0.9 || exact_zero;
        r.pass = r.pass && ok;
        r.data.push_back({{"test_function", names[f]},
                          {"errors", st.errors[f]},
                          {"slope", st.slopes[f]},
                          {"rounding_floor", floor},
                          {"exact_zero", exact_zero},
                          {"ok", ok}});
        r.summary += names[f] + (exact_zero ? " error 0 to rounding  " : " slope " + detail::fmt(st.slopes[f]) + "  ");
    }
    return r;
}

/// 6. E^ sup_t |x^{u_n} - x^mu|^2 weakly decreasing up to 2 SE and <= 1e-2 at n = 16.
inline CriterionResult state_stability(std::uint64_t seed) {
    const TimeGrid fine(1.0, 256);
    const auto rows = stability_gap(detail::drift_cancellation(), ActionSet({-1.0, 1.0}), detail::half_half(),
                                    {2, 4, 8, 16}, detail::benchmark_family(fine),
                                    generate_noise(detail::sub_seed(seed, 6), 10000, fine));
    bool monotone = true;
    for (std::size_t i = 1; i < rows.size(); ++i) monotone = monotone && rows[i].value <= rows[i - 1].value + 2.0 * rows[i].se;
    const bool small = rows.back().value <= 1e-2;
    CriterionResult r{6, "State stability under chattering", monotone && small, "", {}, 0.0};
    ordered_json t = ordered_json::array();
    for (const auto& row : rows) t.push_back({{"n", row.n}, {"value", row.value}, {"se", row.se}, {"argmax", row.argmax}});
    r.data = {{"rows", t}, {"weakly_decreasing", monotone}, {"final_below_1e-2", small}};
    r.summary = "n=16 value " + detail::fmt(rows.back().value) + (monotone ? ", decreasing" : ", NOT decreasing");
    return r;
}

/// 7. |J(u_n) - J(mu)| weakly decreasing up to 2 SE, final (n = 32) within 2 SE + C / n and <= 5e-3.
inline CriterionResult cost_stability(std::uint64_t seed) {
    const TimeGrid fine(1.0, 512);
    const auto st = cost_stability_study(detail::quadratic_cost(0.0), detail::drift_cancellation(),
                                         ActionSet({-1.0, 1.0}), detail::half_half(), {2, 4, 8, 16, 32},
                                         detail::benchmark_family(fine),
                                         generate_noise(detail::sub_seed(seed, 7), 10000, fine));
    std::vector<ChatteringPoint> pts;
    for (const auto& row : st.rows) pts.push_back({row.n, row.value, row.se, row.diff, row.diff_se});
    CriterionResult r{7, "Cost stability under chattering", detail::cost_rows_converge(pts, st.fitted_c, 5e-3), "", {},
                      0.0};
    r.data = {{"reference", st.reference.value},
              {"reference_se", st.reference.se},
              {"fitted_c", st.fitted_c},
              {"rate", detail::diff_rate(pts)},
              {"rows", detail::curve_json(pts, st.fitted_c)}};
    r.summary = "J(mu) " + detail::fmt(st.reference.value) + ", C " + detail::fmt(st.fitted_c) + ", n=32 diff " +
                detail::fmt(pts.back().diff) + ", rate " + detail::fmt(detail::diff_rate(pts));
    return r;
}

/// 8. Strict-versus-relaxed gap: (a) convex-in-action benchmark, (b) drift cancellation,
///    (c) weak duality in both runs.
inline CriterionResult gap_check(std::uint64_t seed) {
    const auto& band = detail::band();
    CriterionResult r{8, "Strict vs relaxed gap", false, "", {}, 0.0};

    const TimeGrid fine_a(1.0, 192);
    const auto rep_a = gap_report(detail::quadratic_cost(0.5), detail::drift_cancellation(), ActionSet({-1.0, 0.0, 1.0}),
                                  TimeGrid(1.0, 6), detail::benchmark_family(fine_a),
                                  generate_noise(detail::sub_seed(seed, 8), 2000, fine_a), {2, 4, 8}, {},
                                  detail::sub_seed(seed, 80));
    const bool a_ok = std::abs(rep_a.gap) <= 2.0 * rep_a.gap_se;

    const TimeGrid fine_b(1.0, 512);
    const auto rep_b = gap_report(detail::quadratic_cost(0.0), detail::drift_cancellation(), ActionSet({-1.0, 1.0}),
                                  TimeGrid(1.0, 8), detail::benchmark_family(fine_b),
                                  generate_noise(detail::sub_seed(seed, 9), 4000, fine_b), {2, 4, 8, 16, 32}, {},
                                  detail::sub_seed(seed, 90));
    const double target = detail::epsilon * detail::epsilon * band.sigma_max() * band.sigma_max() / 2.0;
    const bool b_value = std::abs(rep_b.best_relaxed.value - target) <= 0.1 * target;
    const bool b_curve = detail::cost_rows_converge(rep_b.chattering_curve, rep_b.fitted_c, 5e-3);
    const bool b_strict = rep_b.gap >= 3.0 * rep_b.gap_se && rep_b.gap > 0.0;
    const bool c_ok = rep_a.weak_duality && rep_b.weak_duality;
    r.pass = a_ok && b_value && b_curve && b_strict && c_ok;

    auto run_json = [](const GapReport& g) {
        return ordered_json{{"best_strict", g.best_strict.cost.value},
                            {"best_strict_se", g.best_strict.cost.se},
                            {"best_strict_control", g.best_strict.control.action_index()},
                            {"best_relaxed", g.best_relaxed.value},
                            {"best_relaxed_se", g.best_relaxed.se},
                            {"relaxed_evaluations", g.best_relaxed.evaluations},
                            {"gap", g.gap},
                            {"gap_se", g.gap_se},
                            {"fitted_c", g.fitted_c},
                            {"rate", detail::diff_rate(g.chattering_curve)},
                            {"chattering_curve", detail::curve_json(g.chattering_curve, g.fitted_c)},
                            {"per_scenario_min", g.per_scenario_min},
                            {"sup_inf", g.sup_inf},
                            {"inf_sup", g.inf_sup},
                            {"weak_duality", g.weak_duality},
                            {"fresh_strict", g.fresh_strict ? g.fresh_strict->value : 0.0},
                            {"fresh_relaxed", g.fresh_relaxed ? g.fresh_relaxed->value : 0.0}};
    };
    r.data = {{"convex_in_action", run_json(rep_a)},
              {"drift_cancellation", run_json(rep_b)},
              {"target", target},
              {"a_gap_within_2se", a_ok},
              {"b_relaxed_within_10pct", b_value},
              {"b_chattering_converges", b_curve},
              {"b_strict_worse_by_3se", b_strict},
              {"c_weak_duality", c_ok}};
    r.summary = "(a) gap " + detail::fmt(rep_a.gap) + " se " + detail::fmt(rep_a.gap_se) + "; (b) relaxed " +
                detail::fmt(rep_b.best_relaxed.value) + " target " + detail::fmt(target) + ", strict " +
                detail::fmt(rep_b.best_strict.cost.value) + (b_curve ? ", curve converges" : ", curve NOT converging") +
                "; (c) duality " + (c_ok ? "ok" : "FAILED");
    return r;
}

using Progress = std::function<void(const CriterionResult&)>;

/// Runs checks 1-8.
inline std::vector<CriterionResult> run_core(std::uint64_t seed, const Progress& progress = {}) {
    using Fn = CriterionResult (*)(std::uint64_t);
    const Fn checks[] = {g_normal_oracle, axiom_suite, isometry, bdg, chattering, state_stability, cost_stability,
                         gap_check};
    std::vector<CriterionResult> out;
    for (Fn f : checks) {
        const auto t0 = std::chrono::steady_clock::now();
        auto r = f(seed);
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        // checks 1 and 2 carry a one-minute runtime budget
        if ((r.id == 1 || r.id == 2) && r.seconds > 60.0) {
            r.pass = false;
            r.summary += " [runtime over 60 s]";
        }
        if (progress) progress(r);
        out.push_back(std::move(r));
    }
    return out;
}

inline ordered_json to_json(const std::vector<CriterionResult>& results, std::uint64_t seed) {
    ordered_json j;
    j["suite"] = "acceptance";
    j["seed"] = seed;
    bool all = true;
    j["criteria"] = ordered_json::array();
    for (const auto& r : results) {
        all = all && r.pass;
        j["criteria"].push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"data", r.data}});
    }
    j["all_pass"] = all;
    return j;
}

/// 9. Runs checks 1-8 a second time and compares the serialized records byte for byte.
inline CriterionResult determinism(std::uint64_t seed, const std::string& first_record) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string second = to_json(run_core(seed), seed).dump(2);
    CriterionResult r{9, "Determinism", second == first_record, "", {}, 0.0};
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.data = {{"bytes", first_record.size()}, {"identical", r.pass}};
    r.summary = r.pass ? "second run byte-identical (" + std::to_string(first_record.size()) + " bytes)"
                       : "second run differs";
    return r;
}

/// The whole suite, checks 1-9.
inline std::vector<CriterionResult> run_all(std::uint64_t seed, const Progress& progress = {}) {
    auto results = run_core(seed, progress);
    auto det = determinism(seed, to_json(results, seed).dump(2));
    if (progress) progress(det);
    results.push_back(std::move(det));
    return results;
}

inline std::string format_row(const CriterionResult& r) {
    char head[96];
    std::snprintf(head, sizeof head, "[%s] %d. %-38s", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str());
    return std::string(head) + " " + r.summary + " (" + detail::fmt(r.seconds) + " s)";
}

}  // namespace grelax::acceptance
