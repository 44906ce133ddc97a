#pragma once

/**
 * @file gsde.hpp
 * @brief Euler-Maruyama for the controlled G-SDE
 *
 *     dx = sigma(t, x) dB + int_U b(t, x, a) mu_t(da) dt + int_U gamma(t, x, a) mu_t(da) d<B>
 *
 * driven by a path set of one scenario. Strict controls go through the Dirac embedding
 * and the same relaxed code path. All coefficients are evaluated at the step start.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "grelax/error.hpp"
#include "grelax/numeric.hpp"
#include "grelax/path_engine.hpp"
#include "grelax/relaxed_control.hpp"
#include "grelax/scenario_family.hpp"

namespace grelax {

/// Coefficients b(t, x, a), sigma(t, x), gamma(t, x, a) with declared bounds. Every
/// evaluation is checked against `declared_bound`; `declared_lipschitz` is recorded
/// for reporting only.
template <class Drift, class Diffusion, class QvDrift>
struct GsdeSpec {
    Drift drift;
    Diffusion diffusion;
    QvDrift qv_drift;
    double x0 = 0.0;
    double declared_bound = 1.0;
    double declared_lipschitz = 0.0;
};

template <class D, class S, class G>
GsdeSpec(D, S, G, double, double, double) -> GsdeSpec<D, S, G>;

/// Type-erased coefficients, used by the config registry.
using AnyGsdeSpec = GsdeSpec<std::function<double(double, double, double)>, std::function<double(double, double)>,
                             std::function<double(double, double, double)>>;

struct StatePathSet {
    TimeGrid grid;
    Matrix x_paths;  ///< m x (n + 1), x_paths(p, 0) = x0
    std::string scenario_label;
};

namespace detail {

inline double h1_checked(double v, double bound) {
    if (!(std::abs(v) <= bound)) throw Error(Errc::h1_violated, "H1 violated");
    return v;
}

/// One Euler step of the relaxed dynamics from (t, x) with weight row w.
template <class Spec>
double relaxed_step(const Spec& spec, const ActionSet& actions, std::span<const double> w, double t, double x,
                    double db, double dq, double dt) {
    const double bound = spec.declared_bound;
    double drift = 0.0, qv = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        if (w[j] == 0.0) continue;
        drift += w[j] * h1_checked(spec.drift(t, x, actions[j]), bound);
        qv += w[j] * h1_checked(spec.qv_drift(t, x, actions[j]), bound);
    }
    const double sig = h1_checked(spec.diffusion(t, x), bound);
    return x + sig * db + drift * dt + qv * dq;
}

inline void check_control_grid(const RelaxedControl& mu, const ActionSet& actions, const GPathSet& paths) {
    require(mu.grid() == paths.grid, Errc::grid_mismatch, "gsde: control grid does not match path grid");
    require(mu.n_actions() == actions.size(), Errc::shape_mismatch, "gsde: control has wrong action count");
}

}  // namespace detail

/// Relaxed G-SDE, one state path per noise path.
template <class Spec>
StatePathSet solve_relaxed(const Spec& spec, const ActionSet& actions, const RelaxedControl& mu,
                           const GPathSet& paths) {
    detail::check_control_grid(mu, actions, paths);
    const auto& g = paths.grid;
    const std::size_t n = g.n_steps();
    const double dt = g.dt();
    StatePathSet out{g, Matrix(paths.m_paths(), n + 1), paths.scenario.label()};
    for (std::size_t p = 0; p < paths.m_paths(); ++p) {
        const auto b = paths.b_paths.row(p);
        const auto q = paths.qv_paths.row(p);
        auto x = out.x_paths.row(p);
        x[0] = spec.x0;
        for (std::size_t k = 0; k < n; ++k)
            x[k + 1] = detail::relaxed_step(spec, actions, mu.row(k), g.node(k), x[k], b[k + 1] - b[k],
                                            q[k + 1] - q[k], dt);
    }
    return out;
}

/// Strict G-SDE; identical to solve_relaxed on the embedded control.
template <class Spec>
StatePathSet solve_strict(const Spec& spec, const ActionSet& actions, const StrictControl& u, const GPathSet& paths) {
    return solve_relaxed(spec, actions, embed_strict(u, actions), paths);
}

struct StabilityRow {
    std::size_t n = 0;
    double value = 0.0;  ///< E^ of sup_t |x^{u_n} - x^mu|^2
    double se = 0.0;     ///< SE under the attaining scenario
    std::size_t argmax = 0;
};

/// Refinement factor that realizes `chatter(mu, n)` on a grid of `fine_steps` steps.
inline std::size_t refinement_for(std::size_t fine_steps, std::size_t n, std::size_t n_actions) {
    require(n >= 1 && fine_steps % (n * n_actions) == 0, Errc::grid_mismatch,
            "chattering grid: n * |U| must divide the simulation step count");
    return fine_steps / (n * n_actions);
}

/// For each n: u_n = chatter(mu, n) on the noise grid; per scenario the path average of
/// sup_k |x^{u_n}_k - x^mu_k|^2, then the max over scenarios.
template <class Spec>
std::vector<StabilityRow> stability_gap(const Spec& spec, const ActionSet& actions, const RelaxedControl& mu,
                                        const std::vector<std::size_t>& n_list, const ScenarioFamily& family,
                                        const NoiseBundle& noise) {
    const TimeGrid& fine = noise.grid;
    const RelaxedControl mu_fine = lift(mu, fine);
    std::vector<StrictControl> chattered;
    for (std::size_t n : n_list) chattered.push_back(chatter(mu, n, refinement_for(fine.n_steps(), n, actions.size())));

    std::vector<std::vector<MeanSe>> per(n_list.size());
    for (const auto& sc : family.scenarios()) {
        const auto ps = generate_gbm(noise, sc);
        const auto ref = solve_relaxed(spec, actions, mu_fine, ps);
        for (std::size_t i = 0; i < n_list.size(); ++i) {
            const auto xs = solve_strict(spec, actions, chattered[i], ps);
            std::vector<double> sup(ps.m_paths());
            for (std::size_t p = 0; p < sup.size(); ++p) {
                const auto a = xs.x_paths.row(p);
                const auto r = ref.x_paths.row(p);
                double best = 0.0;
                for (std::size_t k = 0; k < a.size(); ++k) best = std::max(best, (a[k] - r[k]) * (a[k] - r[k]));
                sup[p] = best;
            }
            per[i].push_back(mean_and_se(sup));
        }
    }
    std::vector<StabilityRow> rows;
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        std::vector<double> means;
        for (const auto& m : per[i]) means.push_back(m.mean);
        const auto sup = sublinear_expectation(means);
        rows.push_back({n_list[i], sup.value, per[i][sup.index].se, sup.index});
    }
    return rows;
}

}  // namespace grelax
