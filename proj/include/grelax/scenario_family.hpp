#pragma once

/**
 * @file scenario_family.hpp
 * @brief Volatility uncertainty set, finite scenario families and sup-reductions.
 *
 * A scenario is one volatility policy driving the shared Brownian noise; the law of
 * the resulting integral sigma dW is one member of the family of priors. Sublinear
 * expectations and capacities are suprema over a finite, ordered scenario list.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "grelax/error.hpp"
#include "grelax/numeric.hpp"
#include "grelax/time_grid.hpp"

namespace grelax {

/// Closed volatility interval [sigma_min, sigma_max] with 0 < sigma_min <= sigma_max.
class VolatilityBand {
public:
    VolatilityBand(double sigma_min, double sigma_max) : lo_(sigma_min), hi_(sigma_max) {
        require(std::isfinite(sigma_min) && std::isfinite(sigma_max) && sigma_min > 0.0 &&
                    sigma_min <= sigma_max,
                Errc::invalid_argument, "volatility band: need 0 < sigma_min <= sigma_max");
    }

    double sigma_min() const noexcept { return lo_; }
    double sigma_max() const noexcept { return hi_; }
    bool contains(double s) const noexcept { return s >= lo_ && s <= hi_; }
    bool is_singleton() const noexcept { return lo_ == hi_; }

    friend bool operator==(const VolatilityBand&, const VolatilityBand&) = default;

private:
    double lo_;
    double hi_;
};

/// G(a) = 1/2 sup_{s in band} s^2 a = 1/2 (sigma_max^2 a^+ - sigma_min^2 a^-).
inline double g_operator(double a, const VolatilityBand& band) {
    const double hi = band.sigma_max();
    const double lo = band.sigma_min();
    return a >= 0.0 ? 0.5 * hi * hi * a : 0.5 * lo * lo * a;
}

/// Uniform spatial grid x_i = x_min + i dx, i = 0..nx.
class StateGrid {
public:
    StateGrid(double x_min, double x_max, std::size_t nx) : x_min_(x_min), x_max_(x_max), nx_(nx) {
        require(std::isfinite(x_min) && std::isfinite(x_max) && x_min < x_max, Errc::invalid_argument,
                "state grid: need x_min < x_max");
        require(nx >= 2, Errc::invalid_argument, "state grid: need nx >= 2");
    }

    double x_min() const noexcept { return x_min_; }
    double x_max() const noexcept { return x_max_; }
    std::size_t nx() const noexcept { return nx_; }
    double dx() const noexcept { return (x_max_ - x_min_) / static_cast<double>(nx_); }
    double node(std::size_t i) const noexcept {
        return i == nx_ ? x_max_ : x_min_ + static_cast<double>(i) * dx();
    }

    /// Index of the nearest node, clamped to the grid.
    std::size_t nearest(double x) const noexcept {
        const double pos = std::round((x - x_min_) / dx());
        if (!(pos > 0.0)) return 0;
        if (pos >= static_cast<double>(nx_)) return nx_;
        return static_cast<std::size_t>(pos);
    }

    friend bool operator==(const StateGrid&, const StateGrid&) = default;

private:
    double x_min_;
    double x_max_;
    std::size_t nx_;
};

/// Affine map from the driving state (the B value) to the tabulation coordinate.
struct StateMap {
    double offset = 0.0;
    double scale = 1.0;
    double operator()(double state) const noexcept { return offset + scale * state; }
    friend bool operator==(const StateMap&, const StateMap&) = default;
};

/// Open-loop volatility: one value per time step.
struct DeterministicPath {
    std::vector<double> values;
    friend bool operator==(const DeterministicPath&, const DeterministicPath&) = default;
};

/// State-feedback volatility tabulated on (time step, state-grid node).
struct FeedbackPolicy {
    StateGrid grid;
    StateMap map;
    Matrix sigma;  ///< n_steps x (nx + 1)
    friend bool operator==(const FeedbackPolicy&, const FeedbackPolicy&) = default;
};

enum class ScenarioKind { deterministic, feedback };

class VolatilityScenario {
public:
    static VolatilityScenario deterministic(const VolatilityBand& band, const TimeGrid& grid,
                                            std::vector<double> values, std::string label = {}) {
        require(values.size() == grid.n_steps(), Errc::shape_mismatch,
                "deterministic scenario: need one value per time step");
        for (double v : values)
            require(band.contains(v), Errc::out_of_band, "scenario out of band");
        if (label.empty()) label = "deterministic";
        return VolatilityScenario(std::move(label), band, grid, DeterministicPath{std::move(values)});
    }

    static VolatilityScenario constant(const VolatilityBand& band, const TimeGrid& grid, double sigma) {
        return deterministic(band, grid, std::vector<double>(grid.n_steps(), sigma),
                             "const(" + format_value(sigma) + ")");
    }

    /// Piecewise-constant scenario: `pieces` equal-length segments expanded onto the grid.
    /// The piece count must divide the step count.
    static VolatilityScenario piecewise(const VolatilityBand& band, const TimeGrid& grid,
                                        const std::vector<double>& pieces, std::string label = {}) {
        require(!pieces.empty() && grid.n_steps() % pieces.size() == 0, Errc::shape_mismatch,
                "piecewise scenario: piece count must divide n_steps");
        const std::size_t per = grid.n_steps() / pieces.size();
        std::vector<double> values;
        values.reserve(grid.n_steps());
        for (double p : pieces) values.insert(values.end(), per, p);
        if (label.empty()) {
            label = "piecewise(";
            for (std::size_t i = 0; i < pieces.size(); ++i)
                label += (i ? "," : "") + format_value(pieces[i]);
            label += ")";
        }
        return deterministic(band, grid, std::move(values), std::move(label));
    }

    static VolatilityScenario feedback(const VolatilityBand& band, const TimeGrid& grid,
                                       FeedbackPolicy policy, std::string label = "worst_case_feedback") {
        require(policy.sigma.rows() == grid.n_steps() && policy.sigma.cols() == policy.grid.nx() + 1,
                Errc::shape_mismatch, "feedback scenario: table must be n_steps x (nx + 1)");
        for (double v : policy.sigma.flat())
            require(band.contains(v), Errc::out_of_band, "scenario out of band");
        return VolatilityScenario(std::move(label), band, grid, std::move(policy));
    }

    const std::string& label() const noexcept { return label_; }
    const VolatilityBand& band() const noexcept { return band_; }
    const TimeGrid& grid() const noexcept { return grid_; }

    ScenarioKind kind() const noexcept {
        return std::holds_alternative<DeterministicPath>(policy_) ? ScenarioKind::deterministic
                                                                  : ScenarioKind::feedback;
    }
    const DeterministicPath* as_deterministic() const noexcept { return std::get_if<DeterministicPath>(&policy_); }
    const FeedbackPolicy* as_feedback() const noexcept { return std::get_if<FeedbackPolicy>(&policy_); }

    /// Volatility used on step k when the driving state at t_k equals `state`.
    double sigma_at(std::size_t step, double state) const {
        if (const auto* d = as_deterministic()) return d->values[step];
        const auto& f = std::get<FeedbackPolicy>(policy_);
        return f.sigma(step, f.grid.nearest(f.map(state)));
    }

    friend bool operator==(const VolatilityScenario&, const VolatilityScenario&) = default;

private:
    VolatilityScenario(std::string label, const VolatilityBand& band, const TimeGrid& grid,
                       std::variant<DeterministicPath, FeedbackPolicy> policy)
        : label_(std::move(label)), band_(band), grid_(grid), policy_(std::move(policy)) {}

    static std::string format_value(double v) {
        std::string s = std::to_string(v);
        while (s.size() > 1 && s.back() == '0') s.pop_back();
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }

    std::string label_;
    VolatilityBand band_;
    TimeGrid grid_;
    std::variant<DeterministicPath, FeedbackPolicy> policy_;
};

/// Finite, ordered surrogate for the family of priors. Order is part of the value:
/// all reductions over it run in list order and break ties by first index.
class ScenarioFamily {
public:
    ScenarioFamily(const VolatilityBand& band, std::vector<VolatilityScenario> scenarios,
                   bool includes_worst_case_feedback = false)
        : band_(band), scenarios_(std::move(scenarios)), has_feedback_(includes_worst_case_feedback) {
        require(!scenarios_.empty(), Errc::empty_family, "empty family");
        for (const auto& s : scenarios_) {
            require(s.grid() == scenarios_.front().grid(), Errc::grid_mismatch,
                    "scenario family: all scenarios must share one time grid");
            require(s.band() == band_, Errc::out_of_band, "scenario family: scenario band differs from family band");
        }
    }

    static ScenarioFamily constants(const VolatilityBand& band, const TimeGrid& grid,
                                    const std::vector<double>& sigmas) {
        std::vector<VolatilityScenario> s;
        for (double v : sigmas) s.push_back(VolatilityScenario::constant(band, grid, v));
        return ScenarioFamily(band, std::move(s));
    }

    const VolatilityBand& band() const noexcept { return band_; }
    const TimeGrid& grid() const noexcept { return scenarios_.front().grid(); }
    std::size_t size() const noexcept { return scenarios_.size(); }
    const VolatilityScenario& operator[](std::size_t i) const { return scenarios_[i]; }
    const std::vector<VolatilityScenario>& scenarios() const noexcept { return scenarios_; }
    bool includes_worst_case_feedback() const noexcept { return has_feedback_; }

private:
    VolatilityBand band_;
    std::vector<VolatilityScenario> scenarios_;
    bool has_feedback_;
};

struct SupResult {
    double value = 0.0;
    std::size_t index = 0;  ///< first attaining scenario
};

/// Sublinear expectation from per-scenario estimates: the maximum, first index on ties.
/// The estimates must come from one noise bundle for the axioms to hold exactly.
inline SupResult sublinear_expectation(std::span<const double> per_scenario) {
    require(!per_scenario.empty(), Errc::empty_family, "empty family");
    SupResult r{per_scenario[0], 0};
    for (std::size_t i = 1; i < per_scenario.size(); ++i) {
        if (per_scenario[i] > r.value) r = {per_scenario[i], i};
    }
    return r;
}

}  // namespace grelax
