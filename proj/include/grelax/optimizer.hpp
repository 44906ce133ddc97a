#pragma once

/**
 * @file optimizer.hpp
 * @brief Desk-scale minimization of the robust cost over strict and relaxed open-loop
 *        controls, and the strict-versus-relaxed gap report.
 *
 * Every search runs against one fixed noise bundle, so the objective is a deterministic
 * function of the control and all comparisons between candidates are exact.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "grelax/error.hpp"
#include "grelax/gsde.hpp"
#include "grelax/path_engine.hpp"
#include "grelax/relaxed_control.hpp"
#include "grelax/robust_cost.hpp"
#include "grelax/scenario_family.hpp"

namespace grelax {

inline constexpr double max_enumeration = 1e6;

struct StrictResult {
    StrictControl control;
    RobustCost cost;
    std::size_t enumerated = 0;
};

/// Exhaustive search over all |U|^n index sequences, lexicographic order, first minimum kept.
template <class Evaluator>
StrictResult brute_force_strict(const Evaluator& eval, const TimeGrid& control_grid) {
    const std::size_t na = eval.actions().size();
    const std::size_t n = control_grid.n_steps();
    require(std::pow(static_cast<double>(na), static_cast<double>(n)) <= max_enumeration, Errc::instance_too_large,
            "instance too large");
    std::vector<std::size_t> idx(n, 0);
    std::optional<StrictResult> best;
    std::size_t count = 0;
    while (true) {
        StrictControl u(control_grid, idx);
        auto c = eval(u);
        ++count;
        if (!best || c.value < best->cost.value) best = StrictResult{std::move(u), std::move(c), 0};
        std::size_t pos = n;
        while (pos > 0 && idx[pos - 1] + 1 == na) idx[--pos] = 0;
        if (pos == 0) break;
        ++idx[pos - 1];
    }
    best->enumerated = count;
    return *best;
}

template <class Cost, class Spec>
StrictResult brute_force_strict(const Cost& cost, const Spec& spec, const ActionSet& actions,
                                const TimeGrid& control_grid, const ScenarioFamily& family, const NoiseBundle& noise) {
    require(std::pow(static_cast<double>(actions.size()), static_cast<double>(control_grid.n_steps())) <=
                max_enumeration,
            Errc::instance_too_large, "instance too large");
    return brute_force_strict(RobustEvaluator<Cost, Spec>(cost, spec, actions, family, noise), control_grid);
}

struct OptimizerOptions {
    std::size_t resolution = 4;         ///< simplex grid spacing 1 / resolution in phase one
    std::size_t budget = 20000;         ///< maximum objective evaluations
    double tol_improve = 1e-4;          ///< relative sweep-improvement threshold
    std::size_t refinement_levels = 3;  ///< resolution halvings in phase two
};

struct RelaxedResult {
    RelaxedControl control;
    double value = 0.0;
    double se = 0.0;
    std::size_t evaluations = 0;
    bool budget_exhausted = false;
};

/// Points of the probability simplex in `dim` coordinates with spacing 1 / r, in
/// lexicographic order of the integer compositions.
inline std::vector<std::vector<double>> simplex_grid(std::size_t dim, std::size_t r) {
    std::vector<std::vector<double>> out;
    std::vector<std::size_t> c(dim, 0);
    auto rec = [&](auto&& self, std::size_t pos, std::size_t left) -> void {
        if (pos + 1 == dim) {
            c[pos] = left;
            std::vector<double> row(dim);
            for (std::size_t j = 0; j < dim; ++j) row[j] = static_cast<double>(c[j]) / static_cast<double>(r);
            out.push_back(std::move(row));
            return;
        }
        for (std::size_t v = 0; v <= left; ++v) {
            c[pos] = v;
            self(self, pos + 1, left - v);
        }
    };
    rec(rec, 0, r);
    return out;
}

namespace detail {

/// Coordinate-row search on the product simplex against `objective`, which maps a
/// RelaxedControl to something with `.value` and `.se`.
template <class Objective>
RelaxedResult search_relaxed(const Objective& objective, const TimeGrid& control_grid, std::size_t n_actions,
                             const OptimizerOptions& opt, std::optional<RelaxedControl> start) {
    require(opt.resolution >= 1, Errc::invalid_argument, "optimizer: resolution must be >= 1");
    Matrix w = start ? start->weights() : Matrix(control_grid.n_steps(), n_actions);
    if (start) {
        require(start->grid() == control_grid && start->n_actions() == n_actions, Errc::shape_mismatch,
                "optimizer: start control does not match the control grid");
    } else {
        for (std::size_t k = 0; k < w.rows(); ++k) w(k, 0) = 1.0;
    }

    std::size_t evals = 0;
    bool exhausted = false;
    auto eval = [&](const Matrix& m) {
        ++evals;
        const auto r = objective(RelaxedControl(control_grid, m));
        return std::pair{r.value, r.se};
    };
    auto [best, best_se] = eval(w);
    const double tol = opt.tol_improve * std::max(std::abs(best), 1e-300);

    auto try_trial = [&](Matrix trial) {
        if (evals >= opt.budget) {
            exhausted = true;
            return;
        }
        const auto [v, se] = eval(trial);
        if (v < best) {
            best = v;
            best_se = se;
            w = std::move(trial);
        }
    };
    // Repeats `sweep` while it gains more than tol.
    auto until_stable = [&](auto&& sweep) {
        while (!exhausted) {
            const double sweep_start = best;
            sweep();
            if (!(sweep_start - best > tol)) break;
        }
    };

    // Phase one: every simplex-grid row at every position.
    const auto grid_rows = simplex_grid(n_actions, opt.resolution);
    until_stable([&] {
        for (std::size_t k = 0; k < w.rows() && !exhausted; ++k)
            for (const auto& cand : grid_rows) {
                if (exhausted) break;
                if (std::equal(cand.begin(), cand.end(), w.row(k).begin())) continue;
                Matrix trial = w;
                std::copy(cand.begin(), cand.end(), trial.row(k).begin());
                try_trial(std::move(trial));
            }
    });

    // Phase two: mass moves of size h from action i to action j on one row, and paired
    // moves that also send h back from j to i on a second row. The paired moves follow
    // valleys where one row's effect offsets another's, which single-row moves miss.
    double h = 1.0 / static_cast<double>(opt.resolution);
    for (std::size_t level = 0; level < opt.refinement_levels && !exhausted; ++level) {
        h *= 0.5;
        const double step = h;
        auto movable = [&](const Matrix& m, std::size_t k, std::size_t i) { return m(k, i) >= step; };
        until_stable([&] {
            for (std::size_t k = 0; k < w.rows() && !exhausted; ++k)
                for (std::size_t i = 0; i < n_actions && !exhausted; ++i)
                    for (std::size_t j = 0; j < n_actions && !exhausted; ++j) {
                        if (i == j || !movable(w, k, i)) continue;
                        Matrix trial = w;
                        trial(k, i) -= step;
                        trial(k, j) += step;
                        try_trial(std::move(trial));
                    }
            for (std::size_t k = 0; k < w.rows() && !exhausted; ++k)
                for (std::size_t l = k + 1; l < w.rows() && !exhausted; ++l)
                    for (std::size_t i = 0; i < n_actions && !exhausted; ++i)
                        for (std::size_t j = 0; j < n_actions && !exhausted; ++j) {
                            if (i == j || !movable(w, k, i) || !movable(w, l, j)) continue;
                            Matrix trial = w;
                            trial(k, i) -= step;
                            trial(k, j) += step;
                            trial(l, j) -= step;
                            trial(l, i) += step;
                            try_trial(std::move(trial));
                        }
        });
    }
    return RelaxedResult{RelaxedControl(control_grid, std::move(w)), best, best_se, evals, exhausted};
}

}  // namespace detail

/// Two-phase derivative-free search for min_mu J(mu) over open-loop relaxed controls on
/// `control_grid`: a row-wise scan of the simplex grid with spacing 1 / resolution, then
/// single-row and paired two-row mass moves at halved spacings. Starts from `start` when given,
/// otherwise from the first action on every step.
template <class Evaluator>
RelaxedResult optimize_relaxed(const Evaluator& eval, const TimeGrid& control_grid, const OptimizerOptions& opt = {},
                               std::optional<RelaxedControl> start = std::nullopt) {
    return detail::search_relaxed([&](const RelaxedControl& mu) { return eval(mu); }, control_grid,
                                  eval.actions().size(), opt, std::move(start));
}

template <class Cost, class Spec>
RelaxedResult optimize_relaxed(const Cost& cost, const Spec& spec, const ActionSet& actions,
                               const TimeGrid& control_grid, const ScenarioFamily& family, const NoiseBundle& noise,
                               const OptimizerOptions& opt = {}, std::optional<RelaxedControl> start = std::nullopt) {
    return optimize_relaxed(RobustEvaluator<Cost, Spec>(cost, spec, actions, family, noise), control_grid, opt,
                            std::move(start));
}

/// Same search against J^P for the single scenario with index `scenario`.
template <class Evaluator>
RelaxedResult per_scenario_minimizer(const Evaluator& eval, std::size_t scenario, const TimeGrid& control_grid,
                                     const OptimizerOptions& opt = {},
                                     std::optional<RelaxedControl> start = std::nullopt) {
    require(scenario < eval.n_scenarios(), Errc::out_of_range, "per_scenario_minimizer: scenario index out of range");
    return detail::search_relaxed([&](const RelaxedControl& mu) {
                                      const auto c = eval.scenario_cost(mu, scenario);
                                      return RobustCost{c.mean, c.se, scenario, 0, 0, {}};
                                  },
                                  control_grid, eval.actions().size(), opt, std::move(start));
}

template <class Cost, class Spec>
RelaxedResult per_scenario_minimizer(const Cost& cost, const Spec& spec, const ActionSet& actions,
                                     const TimeGrid& control_grid, const VolatilityScenario& scenario,
                                     const NoiseBundle& noise, const OptimizerOptions& opt = {},
                                     std::optional<RelaxedControl> start = std::nullopt) {
    const ScenarioFamily single(scenario.band(), {scenario});
    return per_scenario_minimizer(RobustEvaluator<Cost, Spec>(cost, spec, actions, single, noise), 0, control_grid,
                                  opt, std::move(start));
}

struct ChatteringPoint {
    std::size_t n = 0;
    double value = 0.0;
    double se = 0.0;
    double diff = 0.0;
    double diff_se = 0.0;
};

struct GapReport {
    StrictResult best_strict;
    RelaxedResult best_relaxed;
    std::vector<ChatteringPoint> chattering_curve;
    double fitted_c = 0.0;
    double gap = 0.0;     ///< best_strict.value - best_relaxed.value
    double gap_se = 0.0;  ///< combined SE of the two estimates
    bool vertex_dominance = false;
    bool chattering_approaches = false;
    bool tolerance_met = false;
    std::vector<double> per_scenario_min;  ///< inf_mu J^P(mu) per scenario, warm-started at the relaxed winner
    double sup_inf = 0.0;
    double inf_sup = 0.0;
    bool weak_duality = false;
    std::optional<RobustCost> fresh_strict;   ///< winners re-evaluated on independent noise
    std::optional<RobustCost> fresh_relaxed;
};

/// Strict brute force on the control grid, relaxed search warm-started at the strict
/// winner, the chattering sequence J(chatter(mu_hat, n)) on the noise grid, and the
/// per-scenario minimizers used for the weak-duality check.
template <class Cost, class Spec>
GapReport gap_report(const Cost& cost, const Spec& spec, const ActionSet& actions, const TimeGrid& control_grid,
                     const ScenarioFamily& family, const NoiseBundle& noise, const std::vector<std::size_t>& n_list,
                     const OptimizerOptions& opt = {}, std::optional<std::uint64_t> fresh_seed = std::nullopt) {
    const RobustEvaluator<Cost, Spec> eval(cost, spec, actions, family, noise);
    auto strict = brute_force_strict(eval, control_grid);
    auto relaxed = optimize_relaxed(eval, control_grid, opt, embed_strict(strict.control, actions));
    GapReport rep{std::move(strict), std::move(relaxed), {}, 0.0, 0.0, 0.0, false, false, false, {}, 0.0, 0.0, false,
                  std::nullopt, std::nullopt};

    rep.gap = rep.best_strict.cost.value - rep.best_relaxed.value;
    rep.gap_se = std::hypot(rep.best_strict.cost.se, rep.best_relaxed.se);
    rep.vertex_dominance = rep.best_strict.cost.value >= rep.best_relaxed.value - 2.0 * rep.gap_se;

    const auto study = cost_stability_study(eval, rep.best_relaxed.control, n_list);
    for (const auto& r : study.rows) rep.chattering_curve.push_back({r.n, r.value, r.se, r.diff, r.diff_se});
    rep.fitted_c = study.fitted_c;
    if (!study.rows.empty()) {
        const auto& last = study.rows.back();
        rep.chattering_approaches =
            last.diff <= 2.0 * last.diff_se + rep.fitted_c / static_cast<double>(last.n);
    }
    rep.tolerance_met = rep.vertex_dominance && rep.chattering_approaches;

    rep.inf_sup = rep.best_relaxed.value;
    rep.sup_inf = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < eval.n_scenarios(); ++s) {
        const auto r = per_scenario_minimizer(eval, s, control_grid, opt, rep.best_relaxed.control);
        rep.per_scenario_min.push_back(r.value);
        rep.sup_inf = std::max(rep.sup_inf, r.value);
    }
    rep.weak_duality = rep.sup_inf <= rep.inf_sup;

    if (fresh_seed) {
        const auto fresh = generate_noise(*fresh_seed, noise.m_paths(), noise.grid);
        rep.fresh_strict = robust_cost(cost, spec, actions, embed_strict(rep.best_strict.control, actions), family, fresh);
        rep.fresh_relaxed = robust_cost(cost, spec, actions, rep.best_relaxed.control, family, fresh);
    }
    return rep;
}

}  // namespace grelax
