#pragma once

/**
 * @file commands.hpp
 * @brief The batch subcommands behind the `grelax` executable. Each one reads a
 *        validated RunConfig, writes `<output_dir>/<name>.json` (plus CSV tables where
 *        noted) and returns the JSON record it wrote.
 *
 * CSV tables and their headers:
 *   gheat_surface.csv      t,x,u
 *   gheat_feedback.csv     t,x,sigma
 *   paths.csv              scenario,path,k,t,b,qv,sigma
 *   chatter.csv            test_function,n,error
 *   states.csv             scenario,path,k,t,x
 *   stability.csv          n,value,se,argmax
 *   cost_stability.csv     n,value,se,diff,diff_se
 *   chattering_curve.csv   n,value,se,diff,diff_se
 */

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "grelax/acceptance.hpp"
#include "grelax/config.hpp"
#include "grelax/family_estimates.hpp"
#include "grelax/gheat_pde.hpp"
#include "grelax/gsde.hpp"
#include "grelax/optimizer.hpp"
#include "grelax/path_engine.hpp"
#include "grelax/robust_cost.hpp"

namespace grelax::cli {

namespace detail {

inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::filesystem::path out_path(const RunConfig& c, const std::string& file) {
    std::filesystem::create_directories(c.output_dir);
    return std::filesystem::path(c.output_dir) / file;
}

inline void write_json(const RunConfig& c, const std::string& file, const ordered_json& j) {
    std::ofstream out(out_path(c, file), std::ios::binary);
    out << j.dump(2) << "\n";
    if (!out) throw Error(Errc::invalid_argument, "cannot write " + file);
}

class Csv {
public:
    Csv(const RunConfig& c, const std::string& file, const std::string& header)
        : out_(out_path(c, file), std::ios::binary) {
        out_ << header << "\n";
    }
    template <class... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
        out_ << "\n";
    }

private:
    static std::string cell(double v) { return num(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(const std::string& v) { return v; }
    std::ofstream out_;
};

inline ordered_json header(const std::string& command, const RunConfig& c) {
    ordered_json j;
    j["command"] = command;
    j["experiment"] = c.experiment;
    j["seed"] = c.seed;
    j["config"] = to_json(c);
    return j;
}

inline ordered_json mean_se_json(const MeanSe& m) { return {{"mean", m.mean}, {"se", m.se}}; }

inline ordered_json robust_json(const RobustCost& r, const ScenarioFamily& fam) {
    ordered_json j{{"value", r.value},
                   {"se", r.se},
                   {"argmax_scenario", r.argmax},
                   {"argmax_label", fam[r.argmax].label()},
                   {"n_paths", r.n_paths},
                   {"seed", r.seed}};
    j["per_scenario"] = ordered_json::array();
    for (std::size_t i = 0; i < r.per_scenario.size(); ++i)
        j["per_scenario"].push_back(
            {{"label", fam[i].label()}, {"mean", r.per_scenario[i].mean}, {"se", r.per_scenario[i].se}});
    return j;
}

inline ordered_json control_json(const RelaxedControl& mu) {
    ordered_json rows = ordered_json::array();
    for (std::size_t k = 0; k < mu.grid().n_steps(); ++k) {
        const auto r = mu.row(k);
        rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    return rows;
}

}  // namespace detail

/// G-heat equation for the configured payoff on the padded grid; value at (T, x0).
inline ordered_json run_gheat(const RunConfig& c) {
    const auto band = band_of(c);
    const auto grid = pde_grid_of(c);
    const auto surface = solve_gheat(payoff_of(c), band, grid);
    auto j = detail::header("gheat", c);
    j["grid"] = ordered_json{{"x_min", grid.space().x_min()}, {"x_max", grid.space().x_max()}, {"nx", grid.nx()},
                             {"nt", grid.nt()},                  {"dx", grid.dx()},                  {"dt", grid.dt()}};
    j["value"] = surface.at(c.horizon, c.x0);
    std::size_t upper = 0;
    for (double v : surface.feedback.flat()) upper += v == band.sigma_max() ? 1 : 0;
    j["feedback_upper_fraction"] = static_cast<double>(upper) / static_cast<double>(surface.feedback.flat().size());

    const std::size_t stride = std::max<std::size_t>(1, grid.nt() / 50);
    detail::Csv u(c, "gheat_surface.csv", "t,x,u");
    detail::Csv s(c, "gheat_feedback.csv", "t,x,sigma");
    for (std::size_t n = 0; n <= grid.nt(); n += stride) {
        for (std::size_t i = 0; i <= grid.nx(); ++i) {
            const double t = grid.time().node(n), x = grid.space().node(i);
            u.row(t, x, surface.values(n, i));
            if (n < grid.nt()) s.row(t, x, surface.feedback(n, i));
        }
    }
    detail::write_json(c, "gheat.json", j);
    return j;
}

/// E^[phi(x0 + B_T)] over the family, with the PDE value and the capacity of {B_T > 0}.
inline ordered_json run_expect(const RunConfig& c) {
    const auto fam = family_of(c);
    const auto noise = generate_noise(c.seed, c.m_paths, simulation_grid(c));
    const Payoff phi = payoff_of(c);
    const double x0 = c.x0;
    const auto est = estimate_expectation(
        [&](const GPathSet& ps, std::size_t p) { return phi(x0 + terminal_value(ps, p)); }, fam, noise);
    const double cap = capacity_estimate([](const GPathSet& ps, std::size_t p) { return terminal_value(ps, p) > 0.0; },
                                         fam, noise);
    auto j = detail::header("expect", c);
    j["value"] = est.value;
    j["se"] = est.se;
    j["argmax_scenario"] = est.argmax;
    j["argmax_label"] = fam[est.argmax].label();
    j["n_paths"] = noise.m_paths();
    j["per_scenario"] = ordered_json::array();
    for (std::size_t i = 0; i < fam.size(); ++i)
        j["per_scenario"].push_back(
            {{"label", fam[i].label()}, {"mean", est.per_scenario[i].mean}, {"se", est.per_scenario[i].se}});
    j["pde_value"] = gnormal_expectation(phi, c.horizon, c.x0, band_of(c), pde_grid_of(c));
    j["capacity_terminal_positive"] = cap;
    detail::write_json(c, "expect.json", j);
    return j;
}

/// G-Brownian paths per scenario: summary statistics and the first paths as CSV.
inline ordered_json run_paths(const RunConfig& c) {
    const auto fam = family_of(c);
    const auto noise = generate_noise(c.seed, c.m_paths, simulation_grid(c));
    auto j = detail::header("paths", c);
    j["scenarios"] = ordered_json::array();
    detail::Csv csv(c, "paths.csv", "scenario,path,k,t,b,qv,sigma");
    for (std::size_t s = 0; s < fam.size(); ++s) {
        const auto ps = generate_gbm(noise, fam[s]);
        const std::size_t n = ps.grid.n_steps();
        std::vector<double> bt(ps.m_paths()), qt(ps.m_paths());
        for (std::size_t p = 0; p < bt.size(); ++p) {
            bt[p] = ps.b_paths(p, n);
            qt[p] = ps.qv_paths(p, n);
        }
        std::vector<double> b2(bt.size());
        for (std::size_t p = 0; p < bt.size(); ++p) b2[p] = bt[p] * bt[p];
        j["scenarios"].push_back({{"label", fam[s].label()},
                                  {"terminal_mean", detail::mean_se_json(mean_and_se(bt))},
                                  {"terminal_second_moment", detail::mean_se_json(mean_and_se(b2))},
                                  {"qv_terminal_mean", mean_and_se(qt).mean},
                                  {"qv_terminal_min", *std::min_element(qt.begin(), qt.end())},
                                  {"qv_terminal_max", *std::max_element(qt.begin(), qt.end())}});
        for (std::size_t p = 0; p < std::min(c.paths_written, ps.m_paths()); ++p)
            for (std::size_t k = 0; k <= n; ++k)
                csv.row(fam[s].label(), p, k, ps.grid.node(k), ps.b_paths(p, k), ps.qv_paths(p, k),
                        k < n ? ps.sigma_used(p, k) : ps.sigma_used(p, n - 1));
    }
    detail::write_json(c, "paths.json", j);
    return j;
}

/// Pairing errors of chatter(mu, n) against mu for the configured test functions.
inline ordered_json run_chatter(const RunConfig& c) {
    const auto mu = control_of(c);
    const auto U = actions_of(c);
    std::vector<PairingFunction> phis;
    for (const auto& n : c.pairings) phis.push_back(make_pairing(n));
    const auto st = chattering_convergence_study(mu, U, phis, c.n_list, c.refinement);
    auto j = detail::header("chatter", c);
    j["control"] = detail::control_json(mu);
    j["test_functions"] = ordered_json::array();
    detail::Csv csv(c, "chatter.csv", "test_function,n,error");
    for (std::size_t f = 0; f < phis.size(); ++f) {
        j["test_functions"].push_back({{"name", c.pairings[f]}, {"errors", st.errors[f]}, {"slope", st.slopes[f]}});
        for (std::size_t i = 0; i < c.n_list.size(); ++i) csv.row(c.pairings[f], c.n_list[i], st.errors[f][i]);
    }
    j["n_list"] = c.n_list;
    detail::write_json(c, "chatter.json", j);
    return j;
}

/// Relaxed G-SDE under the configured control, per scenario, plus the chattering
/// stability table of the states.
inline ordered_json run_solve(const RunConfig& c) {
    const auto fam = family_of(c);
    const auto grid = simulation_grid(c);
    const auto noise = generate_noise(c.seed, c.m_paths, grid);
    const auto spec = dynamics_of(c);
    const auto U = actions_of(c);
    const auto mu = control_of(c);
    const auto mu_fine = lift(mu, grid);
    auto j = detail::header("solve", c);
    j["scenarios"] = ordered_json::array();
    detail::Csv csv(c, "states.csv", "scenario,path,k,t,x");
    for (std::size_t s = 0; s < fam.size(); ++s) {
        const auto xs = solve_relaxed(spec, U, mu_fine, generate_gbm(noise, fam[s]));
        std::vector<double> xt(xs.x_paths.rows()), sup(xs.x_paths.rows());
        for (std::size_t p = 0; p < xt.size(); ++p) {
            xt[p] = xs.x_paths(p, grid.n_steps());
            for (double v : xs.x_paths.row(p)) sup[p] = std::max(sup[p], std::abs(v));
        }
        j["scenarios"].push_back({{"label", fam[s].label()},
                                  {"terminal", detail::mean_se_json(mean_and_se(xt))},
                                  {"sup_abs", detail::mean_se_json(mean_and_se(sup))}});
        for (std::size_t p = 0; p < std::min(c.paths_written, xt.size()); ++p)
            for (std::size_t k = 0; k <= grid.n_steps(); ++k) csv.row(fam[s].label(), p, k, grid.node(k), xs.x_paths(p, k));
    }
    const auto rows = stability_gap(spec, U, mu, c.n_list, fam, noise);
    j["stability"] = ordered_json::array();
    detail::Csv st(c, "stability.csv", "n,value,se,argmax");
    for (const auto& r : rows) {
        j["stability"].push_back({{"n", r.n}, {"value", r.value}, {"se", r.se}, {"argmax", r.argmax}});
        st.row(r.n, r.value, r.se, r.argmax);
    }
    detail::write_json(c, "solve.json", j);
    return j;
}

/// Robust cost of the configured control and its chattering cost-stability table.
inline ordered_json run_cost(const RunConfig& c) {
    const auto fam = family_of(c);
    const auto noise = generate_noise(c.seed, c.m_paths, simulation_grid(c));
    const RobustEvaluator eval(cost_of(c), dynamics_of(c), actions_of(c), fam, noise);
    const auto mu = control_of(c);
    const auto study = cost_stability_study(eval, mu, c.n_list);
    auto j = detail::header("cost", c);
    j["control"] = detail::control_json(mu);
    j["robust_cost"] = detail::robust_json(study.reference, fam);
    j["fitted_c"] = study.fitted_c;
    j["stability"] = ordered_json::array();
    detail::Csv csv(c, "cost_stability.csv", "n,value,se,diff,diff_se");
    for (const auto& r : study.rows) {
        j["stability"].push_back(
            {{"n", r.n}, {"value", r.value}, {"se", r.se}, {"diff", r.diff}, {"diff_se", r.diff_se}});
        csv.row(r.n, r.value, r.se, r.diff, r.diff_se);
    }
    detail::write_json(c, "cost.json", j);
    return j;
}

/// Strict brute force, relaxed search, chattering curve and weak-duality check.
inline ordered_json run_optimize(const RunConfig& c) {
    const auto fam = family_of(c);
    const auto noise = generate_noise(c.seed, c.m_paths, simulation_grid(c));
    const auto U = actions_of(c);
    const auto rep = gap_report(cost_of(c), dynamics_of(c), U, control_grid(c), fam, noise, c.n_list, c.optimizer,
                                c.fresh_seed);
    auto j = detail::header("optimize", c);
    j["best_strict"] = {{"control", rep.best_strict.control.action_index()},
                        {"enumerated", rep.best_strict.enumerated},
                        {"cost", detail::robust_json(rep.best_strict.cost, fam)}};
    j["best_relaxed"] = {{"control", detail::control_json(rep.best_relaxed.control)},
                         {"value", rep.best_relaxed.value},
                         {"se", rep.best_relaxed.se},
                         {"evaluations", rep.best_relaxed.evaluations},
                         {"budget_exhausted", rep.best_relaxed.budget_exhausted}};
    j["gap"] = rep.gap;
    j["gap_se"] = rep.gap_se;
    j["fitted_c"] = rep.fitted_c;
    j["chattering_curve"] = ordered_json::array();
    detail::Csv csv(c, "chattering_curve.csv", "n,value,se,diff,diff_se");
    for (const auto& r : rep.chattering_curve) {
        j["chattering_curve"].push_back(
            {{"n", r.n}, {"value", r.value}, {"se", r.se}, {"diff", r.diff}, {"diff_se", r.diff_se}});
        csv.row(r.n, r.value, r.se, r.diff, r.diff_se);
    }
    j["vertex_dominance"] = rep.vertex_dominance;
    j["chattering_approaches"] = rep.chattering_approaches;
    j["tolerance_met"] = rep.tolerance_met;
    j["per_scenario_min"] = rep.per_scenario_min;
    j["sup_inf"] = rep.sup_inf;
    j["inf_sup"] = rep.inf_sup;
    j["weak_duality"] = rep.weak_duality;
    if (rep.fresh_strict) j["fresh_strict"] = detail::robust_json(*rep.fresh_strict, fam);
    if (rep.fresh_relaxed) j["fresh_relaxed"] = detail::robust_json(*rep.fresh_relaxed, fam);
    detail::write_json(c, "optimize.json", j);
    return j;
}

/// The acceptance suite with the config's seed; prints one row per check.
inline ordered_json run_verify(const RunConfig& c, std::ostream& log) {
    namespace acc = acceptance;
    log << "acceptance suite, seed " << c.seed << "\n" << std::flush;
    const auto results = acc::run_all(c.seed, [&](const acc::CriterionResult& r) {
        log << acc::format_row(r) << "\n" << std::flush;
    });
    auto j = acc::to_json(results, c.seed);
    detail::write_json(c, "verify.json", j);
    return j;
}

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"gheat", "expect", "paths", "chatter", "solve", "cost", "optimize",
                                                "verify"};
    return names;
}

/// Dispatches a subcommand. Returns the process exit status: 0 on success, 1 when
/// `verify` has a failing row.
inline int run(const std::string& sub, const RunConfig& c, std::ostream& log) {
    if (sub == "verify") {
        const auto j = run_verify(c, log);
        return j["all_pass"].get<bool>() ? 0 : 1;
    }
    static const std::map<std::string, std::function<ordered_json(const RunConfig&)>> table{
        {"gheat", run_gheat}, {"expect", run_expect}, {"paths", run_paths},       {"chatter", run_chatter},
        {"solve", run_solve}, {"cost", run_cost},     {"optimize", run_optimize}};
    const auto it = table.find(sub);
    if (it == table.end()) throw Error(Errc::invalid_argument, "unknown subcommand '" + sub + "'");
    it->second(c);
    log << sub << ": wrote " << (std::filesystem::path(c.output_dir) / (sub + ".json")).string() << "\n";
    return 0;
}

}  // namespace grelax::cli
