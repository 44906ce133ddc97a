#pragma once

/**
 * @file config.hpp
 * @brief Run configuration: JSON parsing with per-field diagnostics, validation, and
 *        construction of the grids, family, coefficients and control it describes.
 */

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "grelax/error.hpp"
#include "grelax/gheat_pde.hpp"
#include "grelax/optimizer.hpp"
#include "grelax/registry.hpp"
#include "grelax/relaxed_control.hpp"
#include "grelax/scenario_family.hpp"
#include "grelax/time_grid.hpp"

namespace grelax {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

struct NamedSpec {
    std::string name;
    Params params;
};

/// One family member: constant{sigma}, piecewise{values}, deterministic{values}, or
/// worst_case_feedback{payoff} (bang-bang feedback read off the G-heat solution).
struct ScenarioConfig {
    std::string type;
    double sigma = 0.0;
    std::vector<double> values;
    std::string label;
    NamedSpec payoff;
};

struct RunConfig {
    std::string experiment = "run";
    std::uint64_t seed = 0;
    double sigma_min = 0.5;
    double sigma_max = 1.0;
    double horizon = 1.0;
    std::size_t n_steps = 64;        ///< simulation grid
    std::size_t control_steps = 4;   ///< coarse control grid
    std::size_t m_paths = 1000;
    std::vector<ScenarioConfig> family;
    std::vector<double> actions{-1.0, 1.0};
    NamedSpec dynamics{"drift_cancellation", {}};
    double x0 = 0.0;
    NamedSpec cost{"quadratic", {}};
    NamedSpec payoff{"square", {}};
    std::size_t pde_nx = 400;
    std::optional<std::vector<std::vector<double>>> control;  ///< rows on the control grid; one row broadcasts
    std::vector<std::size_t> n_list{2, 4, 8, 16};
    std::size_t refinement = 8;
    std::vector<std::string> pairings{"t_a", "sin_2pi_t_a", "t2_a"};
    OptimizerOptions optimizer;
    std::optional<std::uint64_t> fresh_seed;
    std::size_t paths_written = 20;  ///< paths written to CSV by `paths` and `solve`
    std::string output_dir = "out";
};

namespace detail {

inline Error config_error(const std::string& field, const std::string& msg) {
    return Error(Errc::invalid_argument, "config: field '" + field + "': " + msg);
}

/// Field reader that reports the dotted path of the offending key.
/// Integer with a non-negative value, whether stored signed or unsigned.
inline bool is_count(const json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

class FieldReader {
public:
    FieldReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw config_error(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key); }
    const json& at(const std::string& key) const { return j_.at(key); }

    void reject_unknown(const std::set<std::string>& known) const {
        for (const auto& [k, v] : j_.items())
            if (!known.count(k)) throw config_error(field(k), "unknown field");
    }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt) const {
        if (!has(key)) {
            if (fallback) return *fallback;
            throw config_error(field(key), "required field missing");
        }
        const auto& v = j_.at(key);
        if (!v.is_number()) throw config_error(field(key), "expected a number");
        return v.get<double>();
    }

    std::uint64_t unsigned_int(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt) const {
        if (!has(key)) {
            if (fallback) return *fallback;
            throw config_error(field(key), "required field missing");
        }
        const auto& v = j_.at(key);
        if (!is_count(v)) throw config_error(field(key), "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }

    std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) const {
        if (!has(key)) {
            if (fallback) return *fallback;
            throw config_error(field(key), "required field missing");
        }
        const auto& v = j_.at(key);
        if (!v.is_string()) throw config_error(field(key), "expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key) const {
        const auto& v = j_.at(key);
        if (!v.is_array()) throw config_error(field(key), "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) throw config_error(field(key) + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    std::vector<std::size_t> counts(const std::string& key) const {
        const auto& v = j_.at(key);
        if (!v.is_array()) throw config_error(field(key), "expected an array of integers");
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!is_count(v[i]))
                throw config_error(field(key) + "[" + std::to_string(i) + "]", "expected a non-negative integer");
            out.push_back(v[i].get<std::size_t>());
        }
        return out;
    }

private:
    const json& j_;
    std::string path_;
};

inline NamedSpec read_named(const json& j, const std::string& path) {
    const FieldReader r(j, path);
    r.reject_unknown({"name", "params"});
    NamedSpec out{r.string("name"), {}};
    if (r.has("params")) {
        const FieldReader p(r.at("params"), path + ".params");
        for (const auto& [k, v] : r.at("params").items()) out.params[k] = p.number(k);
    }
    return out;
}

}  // namespace detail

/// Parses a config object. Every malformed or unknown field raises an Error naming it.
inline RunConfig parse_config(const json& j) {
    using detail::config_error;
    const detail::FieldReader r(j, "");
    r.reject_unknown({"experiment", "seed", "band", "horizon", "n_steps", "control_steps", "m_paths", "family",
                      "actions", "dynamics", "x0", "cost", "payoff", "pde_nx", "control", "n_list", "refinement",
                      "pairings", "optimizer", "fresh_seed", "paths_written", "output_dir"});
    RunConfig c;
    c.experiment = r.string("experiment", c.experiment);
    c.seed = r.unsigned_int("seed");
    if (r.has("band")) {
        const detail::FieldReader b(r.at("band"), "band");
        b.reject_unknown({"sigma_min", "sigma_max"});
        c.sigma_min = b.number("sigma_min");
        c.sigma_max = b.number("sigma_max");
    }
    c.horizon = r.number("horizon", c.horizon);
    c.n_steps = r.unsigned_int("n_steps", c.n_steps);
    c.control_steps = r.unsigned_int("control_steps", c.control_steps);
    c.m_paths = r.unsigned_int("m_paths", c.m_paths);
    if (r.has("family")) {
        const auto& f = r.at("family");
        if (!f.is_array()) throw config_error("family", "expected an array of scenarios");
        for (std::size_t i = 0; i < f.size(); ++i) {
            const std::string path = "family[" + std::to_string(i) + "]";
            const detail::FieldReader s(f[i], path);
            s.reject_unknown({"type", "sigma", "values", "label", "payoff"});
            ScenarioConfig sc;
            sc.type = s.string("type");
            sc.label = s.string("label", "");
            if (sc.type == "constant") {
                sc.sigma = s.number("sigma");
            } else if (sc.type == "piecewise" || sc.type == "deterministic") {
                if (!s.has("values")) throw config_error(s.field("values"), "required field missing");
                sc.values = s.numbers("values");
            } else if (sc.type == "worst_case_feedback") {
                if (!s.has("payoff")) throw config_error(s.field("payoff"), "required field missing");
                sc.payoff = detail::read_named(s.at("payoff"), s.field("payoff"));
            } else {
                throw config_error(s.field("type"),
                                   "unknown scenario type '" + sc.type +
                                       "' (expected constant, piecewise, deterministic or worst_case_feedback)");
            }
            c.family.push_back(std::move(sc));
        }
    } else {
        c.family = {ScenarioConfig{"constant", c.sigma_min, {}, "", {}}, ScenarioConfig{"constant", c.sigma_max, {}, "", {}}};
    }
    if (r.has("actions")) c.actions = r.numbers("actions");
    if (r.has("dynamics")) c.dynamics = detail::read_named(r.at("dynamics"), "dynamics");
    c.x0 = r.number("x0", c.x0);
    if (r.has("cost")) c.cost = detail::read_named(r.at("cost"), "cost");
    if (r.has("payoff")) c.payoff = detail::read_named(r.at("payoff"), "payoff");
    c.pde_nx = r.unsigned_int("pde_nx", c.pde_nx);
    if (r.has("control")) {
        const auto& ctl = r.at("control");
        if (!ctl.is_array()) throw config_error("control", "expected an array of probability rows");
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < ctl.size(); ++i) {
            const std::string f = "control[" + std::to_string(i) + "]";
            if (!ctl[i].is_array()) throw config_error(f, "expected an array of numbers");
            std::vector<double> row;
            for (const auto& v : ctl[i]) {
                if (!v.is_number()) throw config_error(f, "expected an array of numbers");
                row.push_back(v.get<double>());
            }
            rows.push_back(std::move(row));
        }
        c.control = std::move(rows);
    }
    if (r.has("n_list")) c.n_list = r.counts("n_list");
    c.refinement = r.unsigned_int("refinement", c.refinement);
    if (r.has("pairings")) {
        const auto& p = r.at("pairings");
        if (!p.is_array()) throw config_error("pairings", "expected an array of names");
        c.pairings.clear();
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (!p[i].is_string()) throw config_error("pairings[" + std::to_string(i) + "]", "expected a string");
            c.pairings.push_back(p[i].get<std::string>());
        }
    }
    if (r.has("optimizer")) {
        const detail::FieldReader o(r.at("optimizer"), "optimizer");
        o.reject_unknown({"resolution", "budget", "tol_improve", "refinement_levels"});
        c.optimizer.resolution = o.unsigned_int("resolution", c.optimizer.resolution);
        c.optimizer.budget = o.unsigned_int("budget", c.optimizer.budget);
        c.optimizer.tol_improve = o.number("tol_improve", c.optimizer.tol_improve);
        c.optimizer.refinement_levels = o.unsigned_int("refinement_levels", c.optimizer.refinement_levels);
    }
    if (r.has("fresh_seed")) c.fresh_seed = r.unsigned_int("fresh_seed");
    c.paths_written = r.unsigned_int("paths_written", c.paths_written);
    c.output_dir = r.string("output_dir", c.output_dir);
    return c;
}

/// Reads and parses a config file; JSON syntax errors carry line and column.
inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::invalid_argument, "config: cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(Errc::invalid_argument, "config: " + path + ": " + e.what());
    }
    return parse_config(j);
}

inline TimeGrid simulation_grid(const RunConfig& c) { return TimeGrid(c.horizon, c.n_steps); }
inline TimeGrid control_grid(const RunConfig& c) { return TimeGrid(c.horizon, c.control_steps); }
inline VolatilityBand band_of(const RunConfig& c) { return VolatilityBand(c.sigma_min, c.sigma_max); }
inline ActionSet actions_of(const RunConfig& c) { return ActionSet(c.actions); }
inline AnyGsdeSpec dynamics_of(const RunConfig& c) { return make_dynamics(c.dynamics.name, c.dynamics.params, c.x0); }
inline AnyCostSpec cost_of(const RunConfig& c) { return make_cost(c.cost.name, c.cost.params); }
inline Payoff payoff_of(const RunConfig& c) { return make_payoff(c.payoff.name, c.payoff.params); }
inline PdeGrid pde_grid_of(const RunConfig& c) { return PdeGrid::padded(0.0, c.pde_nx, c.horizon, band_of(c)); }

inline ScenarioFamily family_of(const RunConfig& c) {
    const auto band = band_of(c);
    const auto grid = simulation_grid(c);
    std::vector<VolatilityScenario> out;
    bool feedback = false;
    for (const auto& s : c.family) {
        if (s.type == "constant") {
            out.push_back(s.label.empty() ? VolatilityScenario::constant(band, grid, s.sigma)
                                          : VolatilityScenario::deterministic(
                                                band, grid, std::vector<double>(grid.n_steps(), s.sigma), s.label));
        } else if (s.type == "piecewise") {
            out.push_back(VolatilityScenario::piecewise(band, grid, s.values, s.label));
        } else if (s.type == "deterministic") {
            out.push_back(VolatilityScenario::deterministic(band, grid, s.values, s.label));
        } else {
            const auto surface = solve_gheat(make_payoff(s.payoff.name, s.payoff.params), band, pde_grid_of(c));
            out.push_back(s.label.empty() ? extract_worst_case_scenario(surface, grid)
                                          : VolatilityScenario::feedback(band, grid,
                                                                         *extract_worst_case_scenario(surface, grid)
                                                                              .as_feedback(),
                                                                         s.label));
            feedback = true;
        }
    }
    return ScenarioFamily(band, std::move(out), feedback);
}

/// The configured control on the control grid; uniform weights when none is given.
inline RelaxedControl control_of(const RunConfig& c) {
    const auto grid = control_grid(c);
    const std::size_t na = c.actions.size();
    if (!c.control) return RelaxedControl::constant(grid, std::vector<double>(na, 1.0 / static_cast<double>(na)));
    const auto& rows = *c.control;
    if (rows.size() == 1) return RelaxedControl::constant(grid, rows[0]);
    Matrix w(grid.n_steps(), na);
    for (std::size_t k = 0; k < rows.size() && k < w.rows(); ++k)
        for (std::size_t j = 0; j < rows[k].size() && j < na; ++j) w(k, j) = rows[k][j];
    return RelaxedControl(grid, std::move(w));
}

/// Cross-field checks; every violation names the field.
inline void validate(const RunConfig& c) {
    using detail::config_error;
    auto check = [](bool ok, const std::string& field, const std::string& msg) {
        if (!ok) throw config_error(field, msg);
    };
    check(c.sigma_min > 0.0 && c.sigma_min <= c.sigma_max, "band", "need 0 < sigma_min <= sigma_max");
    check(c.horizon > 0.0, "horizon", "must be positive");
    check(c.n_steps >= 1, "n_steps", "must be >= 1");
    check(c.control_steps >= 1 && c.n_steps % c.control_steps == 0, "control_steps",
          "must be >= 1 and divide n_steps");
    check(c.m_paths >= 1, "m_paths", "must be >= 1");
    check(!c.family.empty(), "family", "empty family");
    check(c.pde_nx >= 2, "pde_nx", "must be >= 2");
    check(c.refinement >= 1, "refinement", "must be >= 1");
    check(!c.actions.empty(), "actions", "must be non-empty");
    for (std::size_t i = 0; i < c.n_list.size(); ++i)
        check(c.n_list[i] >= 1 && c.n_steps % (c.n_list[i] * c.actions.size()) == 0,
              "n_list[" + std::to_string(i) + "]", "n * |actions| must divide n_steps");

    auto rethrow_as = [](const std::string& field, auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            throw config_error(field, e.what());
        }
    };
    rethrow_as("actions", [&] { actions_of(c); });
    rethrow_as("dynamics", [&] { dynamics_of(c); });
    rethrow_as("cost", [&] { cost_of(c); });
    rethrow_as("payoff", [&] { payoff_of(c); });
    for (std::size_t i = 0; i < c.pairings.size(); ++i)
        rethrow_as("pairings[" + std::to_string(i) + "]", [&] { make_pairing(c.pairings[i]); });
    for (std::size_t i = 0; i < c.family.size(); ++i) {
        const auto& s = c.family[i];
        const std::string f = "family[" + std::to_string(i) + "]";
        if (s.type == "worst_case_feedback") {
            rethrow_as(f + ".payoff", [&] { make_payoff(s.payoff.name, s.payoff.params); });
            continue;
        }
        rethrow_as(f, [&] {
            const auto band = band_of(c);
            const auto grid = simulation_grid(c);
            if (s.type == "constant") VolatilityScenario::constant(band, grid, s.sigma);
            else if (s.type == "piecewise") VolatilityScenario::piecewise(band, grid, s.values);
            else VolatilityScenario::deterministic(band, grid, s.values);
        });
    }
    if (c.control) {
        const auto& rows = *c.control;
        check(rows.size() == 1 || rows.size() == c.control_steps, "control", "need 1 row or control_steps rows");
        for (std::size_t k = 0; k < rows.size(); ++k)
            check(rows[k].size() == c.actions.size(), "control[" + std::to_string(k) + "]",
                  "row length must equal the number of actions");
        rethrow_as("control", [&] { control_of(c); });
    }
    check(c.optimizer.resolution >= 1, "optimizer.resolution", "must be >= 1");
    check(c.optimizer.budget >= 1, "optimizer.budget", "must be >= 1");
}

inline ordered_json to_json(const NamedSpec& s) {
    ordered_json j;
    j["name"] = s.name;
    j["params"] = ordered_json::object();
    for (const auto& [k, v] : s.params) j["params"][k] = v;
    return j;
}

/// Canonical echo of a config, written next to every artifact.
inline ordered_json to_json(const RunConfig& c) {
    ordered_json j;
    j["experiment"] = c.experiment;
    j["seed"] = c.seed;
    j["band"] = {{"sigma_min", c.sigma_min}, {"sigma_max", c.sigma_max}};
    j["horizon"] = c.horizon;
    j["n_steps"] = c.n_steps;
    j["control_steps"] = c.control_steps;
    j["m_paths"] = c.m_paths;
    j["family"] = ordered_json::array();
    for (const auto& s : c.family) {
        ordered_json e;
        e["type"] = s.type;
        if (s.type == "constant") e["sigma"] = s.sigma;
        if (s.type == "piecewise" || s.type == "deterministic") e["values"] = s.values;
        if (s.type == "worst_case_feedback") e["payoff"] = to_json(s.payoff);
        if (!s.label.empty()) e["label"] = s.label;
        j["family"].push_back(std::move(e));
    }
    j["actions"] = c.actions;
    j["dynamics"] = to_json(c.dynamics);
    j["x0"] = c.x0;
    j["cost"] = to_json(c.cost);
    j["payoff"] = to_json(c.payoff);
    j["pde_nx"] = c.pde_nx;
    if (c.control) j["control"] = *c.control;
    j["n_list"] = c.n_list;
    j["refinement"] = c.refinement;
    j["pairings"] = c.pairings;
    j["optimizer"] = {{"resolution", c.optimizer.resolution},
                      {"budget", c.optimizer.budget},
                      {"tol_improve", c.optimizer.tol_improve},
                      {"refinement_levels", c.optimizer.refinement_levels}};
    if (c.fresh_seed) j["fresh_seed"] = *c.fresh_seed;
    j["paths_written"] = c.paths_written;
    j["output_dir"] = c.output_dir;
    return j;
}

}  // namespace grelax
