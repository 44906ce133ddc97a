#pragma once

// Monte-Carlo sup-estimates over a scenario family: sublinear expectations of path
// functionals and Choquet capacities of path events. All scenarios share one noise
// bundle so the sup-reduction inherits the sublinear-expectation axioms exactly.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "grelax/error.hpp"
#include "grelax/numeric.hpp"
#include "grelax/path_engine.hpp"
#include "grelax/scenario_family.hpp"

namespace grelax {

/// A random variable evaluated on path `p` of a path set.
using PathFunctional = std::function<double(const GPathSet&, std::size_t)>;
/// An event evaluated on path `p` of a path set.
using PathEvent = std::function<bool(const GPathSet&, std::size_t)>;

struct FamilyEstimate {
    std::vector<MeanSe> per_scenario;
    double value = 0.0;
    double se = 0.0;  ///< SE of the attaining scenario
    std::size_t argmax = 0;
};

inline FamilyEstimate reduce_family(std::vector<MeanSe> per_scenario) {
    std::vector<double> means;
    means.reserve(per_scenario.size());
    for (const auto& m : per_scenario) means.push_back(m.mean);
    const auto sup = sublinear_expectation(means);
    FamilyEstimate out;
    out.se = per_scenario[sup.index].se;
    out.per_scenario = std::move(per_scenario);
    out.value = sup.value;
    out.argmax = sup.index;
    return out;
}

/// Per-path samples of `xi` under one path set.
inline std::vector<double> sample_functional(const PathFunctional& xi, const GPathSet& ps) {
    std::vector<double> v(ps.m_paths());
    for (std::size_t p = 0; p < v.size(); ++p) v[p] = xi(ps, p);
    return v;
}

/// E^[xi] ~ max over scenarios of the sample mean of xi.
inline FamilyEstimate estimate_expectation(const PathFunctional& xi, const ScenarioFamily& family,
                                           const NoiseBundle& noise) {
    require(noise.m_paths() >= 1, Errc::no_paths, "no paths");
    std::vector<MeanSe> per;
    for (const auto& sc : family.scenarios()) per.push_back(mean_and_se(sample_functional(xi, generate_gbm(noise, sc))));
    return reduce_family(std::move(per));
}

/// Same estimate over path sets already generated, one per scenario.
inline FamilyEstimate estimate_expectation(const PathFunctional& xi, std::span<const GPathSet> sets) {
    require(!sets.empty(), Errc::empty_family, "empty family");
    std::vector<MeanSe> per;
    for (const auto& ps : sets) per.push_back(mean_and_se(sample_functional(xi, ps)));
    return reduce_family(std::move(per));
}

/// c(A) ~ max over scenarios of the fraction of paths in A; value in [0, 1].
inline double capacity_estimate(const PathEvent& event, const ScenarioFamily& family, const NoiseBundle& noise) {
    require(noise.m_paths() >= 1, Errc::no_paths, "no paths");
    std::vector<double> fractions;
    for (const auto& sc : family.scenarios()) {
        const auto ps = generate_gbm(noise, sc);
        std::size_t hits = 0;
        for (std::size_t p = 0; p < ps.m_paths(); ++p) hits += event(ps, p) ? 1 : 0;
        fractions.push_back(static_cast<double>(hits) / static_cast<double>(ps.m_paths()));
    }
    return sublinear_expectation(fractions).value;
}

/// Terminal value B_T of path p.
inline double terminal_value(const GPathSet& ps, std::size_t p) { return ps.b_paths(p, ps.grid.n_steps()); }

}  // namespace grelax
