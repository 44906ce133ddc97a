#pragma once

/**
 * @file robust_cost.hpp
 * @brief Per-scenario cost J^P(mu) and robust cost J(mu) = sup_P J^P(mu) of the
 *        running-plus-terminal payoff chi^mu.
 *
 * Standard errors are per scenario; the robust estimate carries the SE of the
 * attaining scenario.
 */

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "grelax/error.hpp"
#include "grelax/gsde.hpp"
#include "grelax/numeric.hpp"
#include "grelax/path_engine.hpp"
#include "grelax/relaxed_control.hpp"
#include "grelax/scenario_family.hpp"

namespace grelax {

/// Running cost f(t, x, a) and terminal cost h(x), both bounded by `declared_bound`.
template <class Running, class Terminal>
struct CostSpec {
    Running running;
    Terminal terminal;
    double declared_bound = 1.0;
};

template <class F, class H>
CostSpec(F, H, double) -> CostSpec<F, H>;

using AnyCostSpec = CostSpec<std::function<double(double, double, double)>, std::function<double(double)>>;

namespace detail {

inline double h2_checked(double v, double bound) {
    if (!(std::abs(v) <= bound)) throw Error(Errc::h2_violated, "H2 violated");
    return v;
}

template <class Cost>
double running_rate(const Cost& cost, const ActionSet& actions, std::span<const double> w, double t, double x) {
    double s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j)
        if (w[j] != 0.0) s += w[j] * h2_checked(cost.running(t, x, actions[j]), cost.declared_bound);
    return s;
}

template <class Cost>
double finish_chi(const Cost& cost, double running_integral, double x_terminal, double horizon) {
    const double v = running_integral + h2_checked(cost.terminal(x_terminal), cost.declared_bound);
    if (!(std::abs(v) <= cost.declared_bound * (horizon + 1.0)))
        throw Error(Errc::h2_violated, "H2 violated: |chi| exceeds bound * (T + 1)");
    return v;
}

}  // namespace detail

/// Per path: sum_k sum_a w_k(a) f(t_k, x_k, a) dt + h(x_T).
template <class Cost>
std::vector<double> chi(const Cost& cost, const ActionSet& actions, const RelaxedControl& mu,
                        const StatePathSet& states) {
    require(mu.grid() == states.grid, Errc::grid_mismatch, "chi: control grid does not match state grid");
    const auto& g = states.grid;
    const std::size_t n = g.n_steps();
    const double dt = g.dt();
    std::vector<double> out(states.x_paths.rows());
    for (std::size_t p = 0; p < out.size(); ++p) {
        const auto x = states.x_paths.row(p);
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += detail::running_rate(cost, actions, mu.row(k), g.node(k), x[k]) * dt;
        out[p] = detail::finish_chi(cost, acc, x[n], g.horizon());
    }
    return out;
}

/// chi along freshly simulated states without storing them. Produces the same values,
/// bit for bit, as chi(cost, actions, mu, solve_relaxed(spec, actions, mu, paths)).
template <class Spec, class Cost>
std::vector<double> chi_samples(const Cost& cost, const Spec& spec, const ActionSet& actions,
                                const RelaxedControl& mu, const GPathSet& paths) {
    detail::check_control_grid(mu, actions, paths);
    const auto& g = paths.grid;
    const std::size_t n = g.n_steps();
    const double dt = g.dt();
    std::vector<double> out(paths.m_paths());
    for (std::size_t p = 0; p < out.size(); ++p) {
        const auto b = paths.b_paths.row(p);
        const auto q = paths.qv_paths.row(p);
        double x = spec.x0;
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const auto w = mu.row(k);
            const double t = g.node(k);
            acc += detail::running_rate(cost, actions, w, t, x) * dt;
            x = detail::relaxed_step(spec, actions, w, t, x, b[k + 1] - b[k], q[k + 1] - q[k], dt);
        }
        out[p] = detail::finish_chi(cost, acc, x, g.horizon());
    }
    return out;
}

/// J^P(mu) for the scenario P, as a Monte-Carlo mean with its SE.
template <class Cost, class Spec>
MeanSe cost_under_scenario(const Cost& cost, const Spec& spec, const ActionSet& actions, const RelaxedControl& mu,
                           const VolatilityScenario& scenario, const NoiseBundle& noise) {
    return mean_and_se(chi_samples(cost, spec, actions, lift(mu, noise.grid), generate_gbm(noise, scenario)));
}

struct RobustCost {
    double value = 0.0;
    double se = 0.0;
    std::size_t argmax = 0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    std::vector<MeanSe> per_scenario;
};

inline RobustCost reduce_costs(std::vector<MeanSe> per, const NoiseBundle& noise) {
    std::vector<double> means;
    for (const auto& m : per) means.push_back(m.mean);
    const auto sup = sublinear_expectation(means);
    RobustCost r;
    r.value = sup.value;
    r.se = per[sup.index].se;
    r.argmax = sup.index;
    r.n_paths = noise.m_paths();
    r.seed = noise.seed;
    r.per_scenario = std::move(per);
    return r;
}

/// J(mu) = max over the family of J^P(mu), all scenarios on one noise bundle.
template <class Cost, class Spec>
RobustCost robust_cost(const Cost& cost, const Spec& spec, const ActionSet& actions, const RelaxedControl& mu,
                       const ScenarioFamily& family, const NoiseBundle& noise) {
    std::vector<MeanSe> per;
    for (const auto& sc : family.scenarios()) per.push_back(cost_under_scenario(cost, spec, actions, mu, sc, noise));
    return reduce_costs(std::move(per), noise);
}

/// Robust cost evaluator that generates each scenario's paths once and reuses them
/// for every control it is asked about.
template <class Cost, class Spec>
class RobustEvaluator {
public:
    RobustEvaluator(Cost cost, Spec spec, ActionSet actions, const ScenarioFamily& family, const NoiseBundle& noise)
        : cost_(std::move(cost)), spec_(std::move(spec)), actions_(std::move(actions)), noise_(&noise) {
        for (const auto& sc : family.scenarios()) paths_.push_back(generate_gbm(noise, sc));
    }

    const ActionSet& actions() const noexcept { return actions_; }
    const TimeGrid& grid() const noexcept { return noise_->grid; }
    std::size_t n_scenarios() const noexcept { return paths_.size(); }
    std::size_t evaluations() const noexcept { return evaluations_; }

    MeanSe scenario_cost(const RelaxedControl& mu, std::size_t scenario) const {
        ++evaluations_;
        return mean_and_se(chi_samples(cost_, spec_, actions_, lift(mu, grid()), paths_[scenario]));
    }

    RobustCost operator()(const RelaxedControl& mu) const {
        const RelaxedControl fine = lift(mu, grid());
        std::vector<MeanSe> per;
        for (const auto& ps : paths_) per.push_back(mean_and_se(chi_samples(cost_, spec_, actions_, fine, ps)));
        ++evaluations_;
        return reduce_costs(std::move(per), *noise_);
    }

    RobustCost operator()(const StrictControl& u) const { return (*this)(embed_strict(u, actions_)); }

private:
    Cost cost_;
    Spec spec_;
    ActionSet actions_;
    const NoiseBundle* noise_;
    std::vector<GPathSet> paths_;
    mutable std::size_t evaluations_ = 0;
};

struct CostStabilityRow {
    std::size_t n = 0;
    double value = 0.0;    ///< J(chatter(mu, n))
    double se = 0.0;
    double diff = 0.0;     ///< |J(u_n) - J(mu)|
    double diff_se = 0.0;  ///< sqrt(se_n^2 + se_mu^2)
};

struct CostStabilityStudy {
    RobustCost reference;  ///< J(mu)
    std::vector<CostStabilityRow> rows;
    double fitted_c = 0.0;  ///< least-squares C in |diff| ~ C / n
};

inline double fit_inverse_n(const std::vector<std::size_t>& ns, const std::vector<double>& diffs) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const double inv = 1.0 / static_cast<double>(ns[i]);
        num += diffs[i] * inv;
        den += inv * inv;
    }
    return den > 0.0 ? num / den : 0.0;
}

template <class Evaluator>
CostStabilityStudy cost_stability_study(const Evaluator& eval, const RelaxedControl& mu,
                                        const std::vector<std::size_t>& n_list) {
    CostStabilityStudy out;
    out.reference = eval(mu);
    std::vector<double> diffs;
    for (std::size_t n : n_list) {
        const auto u = chatter(mu, n, refinement_for(eval.grid().n_steps(), n, eval.actions().size()));
        const auto j = eval(u);
        const double d = std::abs(j.value - out.reference.value);
        out.rows.push_back({n, j.value, j.se, d, std::sqrt(j.se * j.se + out.reference.se * out.reference.se)});
        diffs.push_back(d);
    }
    out.fitted_c = fit_inverse_n(n_list, diffs);
    return out;
}

/// |J(chatter(mu, n)) - J(mu)| for each n, on the noise bundle's grid.
template <class Cost, class Spec>
CostStabilityStudy cost_stability_study(const Cost& cost, const Spec& spec, const ActionSet& actions,
                                        const RelaxedControl& mu, const std::vector<std::size_t>& n_list,
                                        const ScenarioFamily& family, const NoiseBundle& noise) {
    return cost_stability_study(RobustEvaluator<Cost, Spec>(cost, spec, actions, family, noise), mu, n_list);
}

}  // namespace grelax
