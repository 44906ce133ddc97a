#pragma once

/**
 * @file relaxed_control.hpp
 * @brief Strict and relaxed (measure-valued) open-loop controls on a finite action set,
 *        the Dirac embedding, the stable-topology pairing and the chattering construction.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

#include "grelax/error.hpp"
#include "grelax/numeric.hpp"
#include "grelax/time_grid.hpp"

namespace grelax {

/// Finite, ordered set of distinct scalar actions.
class ActionSet {
public:
    explicit ActionSet(std::vector<double> actions) : actions_(std::move(actions)) {
        require(!actions_.empty(), Errc::invalid_argument, "action set: must be non-empty");
        for (std::size_t i = 0; i < actions_.size(); ++i) {
            require(std::isfinite(actions_[i]), Errc::invalid_argument, "action set: non-finite action");
            for (std::size_t j = 0; j < i; ++j)
                require(actions_[i] != actions_[j], Errc::invalid_argument, "action set: actions must be distinct");
        }
    }

    std::size_t size() const noexcept { return actions_.size(); }
    double operator[](std::size_t i) const { return actions_[i]; }
    const std::vector<double>& values() const noexcept { return actions_; }

    friend bool operator==(const ActionSet&, const ActionSet&) = default;

private:
    std::vector<double> actions_;
};

/// mu_t(da) dt as one probability row per time step.
class RelaxedControl {
public:
    static constexpr double row_tolerance = 1e-12;

    RelaxedControl(const TimeGrid& grid, Matrix weights) : grid_(grid), weights_(std::move(weights)) {
        require(weights_.rows() == grid_.n_steps() && weights_.cols() >= 1, Errc::shape_mismatch,
                "relaxed control: weights must be n_steps x |U|");
        for (std::size_t k = 0; k < weights_.rows(); ++k) {
            double s = 0.0;
            for (double w : weights_.row(k)) {
                require(std::isfinite(w) && w >= 0.0, Errc::invalid_argument, "relaxed control: negative weight");
                s += w;
            }
            require(std::abs(s - 1.0) <= row_tolerance, Errc::invalid_argument,
                    "relaxed control: rows must sum to 1");
        }
    }

    /// Same probability row on every step.
    static RelaxedControl constant(const TimeGrid& grid, const std::vector<double>& row) {
        Matrix w(grid.n_steps(), row.size());
        for (std::size_t k = 0; k < grid.n_steps(); ++k) std::copy(row.begin(), row.end(), w.row(k).begin());
        return RelaxedControl(grid, std::move(w));
    }

    const TimeGrid& grid() const noexcept { return grid_; }
    const Matrix& weights() const noexcept { return weights_; }
    std::size_t n_actions() const noexcept { return weights_.cols(); }
    std::span<const double> row(std::size_t k) const { return weights_.row(k); }

    friend bool operator==(const RelaxedControl&, const RelaxedControl&) = default;

private:
    TimeGrid grid_;
    Matrix weights_;
};

/// Piecewise-constant U-valued control: one action index per step.
class StrictControl {
public:
    StrictControl(const TimeGrid& grid, std::vector<std::size_t> action_index)
        : grid_(grid), index_(std::move(action_index)) {
        require(index_.size() == grid_.n_steps(), Errc::shape_mismatch,
                "strict control: need one action index per step");
    }

    const TimeGrid& grid() const noexcept { return grid_; }
    const std::vector<std::size_t>& action_index() const noexcept { return index_; }
    std::size_t operator[](std::size_t k) const { return index_[k]; }

    friend bool operator==(const StrictControl&, const StrictControl&) = default;

private:
    TimeGrid grid_;
    std::vector<std::size_t> index_;
};

/// The Dirac embedding u -> delta_{u(t)}(da) dt.
inline RelaxedControl embed_strict(const StrictControl& u, const ActionSet& actions) {
    Matrix w(u.grid().n_steps(), actions.size());
    for (std::size_t k = 0; k < u.grid().n_steps(); ++k) {
        require(u[k] < actions.size(), Errc::invalid_argument, "strict control: action index out of range");
        w(k, u[k]) = 1.0;
    }
    return RelaxedControl(u.grid(), std::move(w));
}

/// Re-express a relaxed control on a grid that subdivides its own.
inline RelaxedControl lift(const RelaxedControl& mu, const TimeGrid& fine) {
    if (fine == mu.grid()) return mu;
    require(fine.refines(mu.grid()), Errc::grid_mismatch, "lift: target grid must subdivide the control grid");
    const std::size_t factor = fine.n_steps() / mu.grid().n_steps();
    Matrix w(fine.n_steps(), mu.n_actions());
    for (std::size_t k = 0; k < fine.n_steps(); ++k) {
        const auto src = mu.row(k / factor);
        std::copy(src.begin(), src.end(), w.row(k).begin());
    }
    return RelaxedControl(fine, std::move(w));
}

inline StrictControl lift(const StrictControl& u, const TimeGrid& fine) {
    if (fine == u.grid()) return u;
    require(fine.refines(u.grid()), Errc::grid_mismatch, "lift: target grid must subdivide the control grid");
    const std::size_t factor = fine.n_steps() / u.grid().n_steps();
    std::vector<std::size_t> idx(fine.n_steps());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = u[k / factor];
    return StrictControl(fine, std::move(idx));
}

/// Time-average of the weights of `mu` over [a, b], integrated exactly by step overlap.
inline std::vector<double> block_average(const RelaxedControl& mu, double a, double b) {
    const auto& g = mu.grid();
    std::vector<double> avg(mu.n_actions(), 0.0);
    for (std::size_t k = 0; k < g.n_steps(); ++k) {
        const double overlap = std::min(b, g.node(k + 1)) - std::max(a, g.node(k));
        if (overlap <= 0.0) continue;
        const auto r = mu.row(k);
        for (std::size_t j = 0; j < avg.size(); ++j) avg[j] += r[j] * overlap;
    }
    for (double& v : avg) v /= (b - a);
    return avg;
}

/// Largest-remainder apportionment of `slots` steps to quotas weights * slots.
/// Ties in the remainder go to the earlier action.
inline std::vector<std::size_t> apportion(const std::vector<double>& weights, std::size_t slots) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<std::size_t> counts(weights.size());
    std::vector<double> frac(weights.size());
    std::size_t used = 0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        const double quota = weights[j] / total * static_cast<double>(slots);
        const double fl = std::floor(quota);
        counts[j] = static_cast<std::size_t>(fl);
        frac[j] = weights[j] > 0.0 ? quota - fl : -1.0;
        used += counts[j];
    }
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return frac[x] > frac[y]; });
    for (std::size_t i = 0; used < slots && i < order.size(); ++i, ++used) ++counts[order[i]];
    return counts;
}

/// Chattering approximation of `mu` by a strict control.
///
/// [0, T] is cut into n blocks. On each block the block-averaged weights w(a) are
/// computed and the block is split into consecutive sub-intervals in action order,
/// the a-th of length w(a) T / n. The result lives on a grid with n |U| r steps, each
/// block's |U| r steps being apportioned by largest remainder. Zero-weight actions
/// receive no steps.
inline StrictControl chatter(const RelaxedControl& mu, std::size_t n, std::size_t refinement = 8) {
    require(n >= 1, Errc::invalid_argument, "chatter: n must be >= 1");
    require(refinement >= 1, Errc::invalid_argument, "chatter: refinement factor must be >= 1");
    const double horizon = mu.grid().horizon();
    const std::size_t per_block = mu.n_actions() * refinement;
    const TimeGrid fine(horizon, n * per_block);
    std::vector<std::size_t> idx;
    idx.reserve(fine.n_steps());
    for (std::size_t i = 0; i < n; ++i) {
        const double a = horizon * static_cast<double>(i) / static_cast<double>(n);
        const double b = i + 1 == n ? horizon : horizon * static_cast<double>(i + 1) / static_cast<double>(n);
        const auto counts = apportion(block_average(mu, a, b), per_block);
        for (std::size_t j = 0; j < counts.size(); ++j) idx.insert(idx.end(), counts[j], j);
    }
    return StrictControl(fine, std::move(idx));
}

/// Test function phi(t, a) for the stable topology.
using PairingFunction = std::function<double(double, double)>;

/// sum_k sum_a w_k(a) phi(t_k, a) dt (left-endpoint rule).
inline double stable_pairing(const RelaxedControl& q, const ActionSet& actions, const PairingFunction& phi) {
    require(q.n_actions() == actions.size(), Errc::shape_mismatch, "stable_pairing: action count mismatch");
    const auto& g = q.grid();
    std::vector<double> terms(g.n_steps());
    for (std::size_t k = 0; k < g.n_steps(); ++k) {
        const auto r = q.row(k);
        double s = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j)
            if (r[j] != 0.0) s += r[j] * phi(g.node(k), actions[j]);
        terms[k] = s * g.dt();
    }
    return pairwise_sum(terms);
}

inline double stable_pairing(const StrictControl& u, const ActionSet& actions, const PairingFunction& phi) {
    return stable_pairing(embed_strict(u, actions), actions, phi);
}

struct ChatteringStudy {
    std::vector<std::size_t> n_list;
    std::vector<std::vector<double>> errors;  ///< errors[f][i]: test function f, n_list[i]
    std::vector<double> slopes;               ///< fitted log-log slope per test function (NaN if all errors vanish)
};

/// |pairing(chatter(mu, n)) - pairing(mu)| for each test function and each n.
inline ChatteringStudy chattering_convergence_study(const RelaxedControl& mu, const ActionSet& actions,
                                                    const std::vector<PairingFunction>& phis,
                                                    const std::vector<std::size_t>& n_list,
                                                    std::size_t refinement = 8) {
    ChatteringStudy out;
    out.n_list = n_list;
    std::vector<double> ns(n_list.begin(), n_list.end());
    for (const auto& phi : phis) {
        const double ref = stable_pairing(mu, actions, phi);
        std::vector<double> errs;
        for (std::size_t n : n_list) errs.push_back(std::abs(stable_pairing(chatter(mu, n, refinement), actions, phi) - ref));
        out.slopes.push_back(loglog_slope(ns, errs));
        out.errors.push_back(std::move(errs));
    }
    return out;
}

}  // namespace grelax
