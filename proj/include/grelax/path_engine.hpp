#pragma once

/**
 * @file path_engine.hpp
 * @brief Shared Gaussian noise, G-Brownian paths per scenario, discrete stochastic
 *        integrals, and empirical checks of the isometry and BDG-type bounds.
 *
 * Noise generator: every path p owns a std::mt19937_64 seeded through
 * std::seed_seq{seed_lo, seed_hi, p_lo, p_hi}; standard normals are produced with the
 * Marsaglia polar method implemented below, so draws do not depend on the standard
 * library's distribution implementation. Draws are stored path-major, step-minor.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "grelax/error.hpp"
#include "grelax/numeric.hpp"
#include "grelax/scenario_family.hpp"
#include "grelax/time_grid.hpp"

namespace grelax {

struct NoiseBundle {
    std::uint64_t seed = 0;
    TimeGrid grid{1.0, 1};
    Matrix increments;  ///< m_paths x n_steps standard normals

    std::size_t m_paths() const noexcept { return increments.rows(); }
};

namespace detail {

inline std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t path) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
    return std::mt19937_64(seq);
}

/// Marsaglia polar method; fills `out` with independent N(0,1) draws.
inline void fill_standard_normal(std::mt19937_64& eng, std::span<double> out) {
    constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
    auto uniform = [&] { return static_cast<double>(eng() >> 11) * scale; };
    std::size_t i = 0;
    while (i < out.size()) {
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        out[i++] = u * f;
        if (i < out.size()) out[i++] = v * f;
    }
}

}  // namespace detail

/// Deterministic in (seed, m_paths, grid): regenerating reproduces identical draws.
inline NoiseBundle generate_noise(std::uint64_t seed, std::size_t m_paths, const TimeGrid& grid) {
    require(m_paths >= 1, Errc::no_paths, "no paths");
    NoiseBundle nb{seed, grid, Matrix(m_paths, grid.n_steps())};
    for (std::size_t p = 0; p < m_paths; ++p) {
        auto eng = detail::path_engine(seed, p);
        detail::fill_standard_normal(eng, nb.increments.row(p));
    }
    return nb;
}

/// Paths of B and <B> under one scenario, driven by a noise bundle.
struct GPathSet {
    VolatilityScenario scenario;
    TimeGrid grid;
    Matrix b_paths;     ///< m x (n + 1), B_0 = 0
    Matrix qv_paths;    ///< m x (n + 1), <B>_0 = 0
    Matrix sigma_used;  ///< m x n realized volatilities

    std::size_t m_paths() const noexcept { return b_paths.rows(); }
};

/// B_{k+1} = B_k + s_k sqrt(dt) Z_k and <B>_{k+1} = <B>_k + s_k^2 dt, with s_k taken
/// from the scenario at the step start (feedback scenarios read B_k).
inline GPathSet generate_gbm(const NoiseBundle& noise, const VolatilityScenario& scenario) {
    require(noise.grid == scenario.grid(), Errc::grid_mismatch,
            "generate_gbm: scenario grid does not match noise grid");
    const std::size_t m = noise.m_paths();
    const std::size_t n = noise.grid.n_steps();
    require(m >= 1, Errc::no_paths, "no paths");
    const double dt = noise.grid.dt();
    const double sqdt = std::sqrt(dt);
    const auto& band = scenario.band();

    GPathSet ps{scenario, noise.grid, Matrix(m, n + 1), Matrix(m, n + 1), Matrix(m, n)};
    for (std::size_t p = 0; p < m; ++p) {
        const auto z = noise.increments.row(p);
        auto b = ps.b_paths.row(p);
        auto q = ps.qv_paths.row(p);
        auto s = ps.sigma_used.row(p);
        for (std::size_t k = 0; k < n; ++k) {
            const double sig = scenario.sigma_at(k, b[k]);
            require(band.contains(sig), Errc::out_of_band, "scenario out of band");
            s[k] = sig;
            b[k + 1] = b[k] + sig * sqdt * z[k];
            q[k + 1] = q[k] + sig * sig * dt;
        }
    }
    return ps;
}

namespace detail {

inline void check_eta_shape(const Matrix& eta, const GPathSet& paths) {
    require(eta.rows() == paths.m_paths() && eta.cols() == paths.grid.n_steps(), Errc::shape_mismatch,
            "integrand shape mismatch: expected m_paths x n_steps");
}

template <class Increment>
std::vector<double> integrate(const Matrix& eta, const Matrix& driver) {
    std::vector<double> out(eta.rows());
    for (std::size_t p = 0; p < eta.rows(); ++p) {
        const auto e = eta.row(p);
        const auto d = driver.row(p);
        double acc = 0.0;
        for (std::size_t k = 0; k < e.size(); ++k) acc += e[k] * Increment{}(d, k);
        out[p] = acc;
    }
    return out;
}

struct ForwardDifference {
    double operator()(std::span<const double> d, std::size_t k) const { return d[k + 1] - d[k]; }
};

}  // namespace detail

/// Per path: sum_k eta_k (B_{k+1} - B_k). Adaptedness of eta is the caller's contract.
inline std::vector<double> g_integral(const Matrix& eta, const GPathSet& paths) {
    detail::check_eta_shape(eta, paths);
    return detail::integrate<detail::ForwardDifference>(eta, paths.b_paths);
}

/// Per path: sum_k eta_k (<B>_{k+1} - <B>_k).
inline std::vector<double> qv_integral(const Matrix& eta, const GPathSet& paths) {
    detail::check_eta_shape(eta, paths);
    return detail::integrate<detail::ForwardDifference>(eta, paths.qv_paths);
}

/// An integrand built from a path set: row p, column k is eta on path p over step k.
using AdaptedProcess = std::function<Matrix(const GPathSet&)>;

/// Deterministic step process, one value per step, replicated on every path.
inline AdaptedProcess deterministic_process(std::vector<double> per_step) {
    return [v = std::move(per_step)](const GPathSet& ps) {
        require(v.size() == ps.grid.n_steps(), Errc::shape_mismatch, "integrand shape mismatch");
        Matrix eta(ps.m_paths(), v.size());
        for (std::size_t p = 0; p < eta.rows(); ++p) std::copy(v.begin(), v.end(), eta.row(p).begin());
        return eta;
    };
}

/// eta_k = B_{t_k}, the left-endpoint value of the path.
inline AdaptedProcess path_value_process() {
    return [](const GPathSet& ps) {
        Matrix eta(ps.m_paths(), ps.grid.n_steps());
        for (std::size_t p = 0; p < eta.rows(); ++p)
            for (std::size_t k = 0; k < eta.cols(); ++k) eta(p, k) = ps.b_paths(p, k);
        return eta;
    };
}

struct IsometryReport {
    double lhs = 0.0;  ///< E^[(int eta dB)^2]
    double rhs = 0.0;  ///< E^[int eta^2 d<B>]
    double rel_err = 0.0;
    double lhs_se = 0.0;
    double rhs_se = 0.0;
    std::size_t lhs_index = 0;
    std::size_t rhs_index = 0;
};

/// Isometry check over path sets already generated, one per scenario.
inline IsometryReport check_isometry(const AdaptedProcess& eta, std::span<const GPathSet> sets,
                                     double eps = 1e-300) {
    std::vector<MeanSe> l, r;
    for (const auto& ps : sets) {
        const Matrix e = eta(ps);
        Matrix e2 = e;
        for (std::size_t p = 0; p < e2.rows(); ++p)
            for (double& x : e2.row(p)) x *= x;
        auto gi = g_integral(e, ps);
        for (double& x : gi) x *= x;
        l.push_back(mean_and_se(gi));
        r.push_back(mean_and_se(qv_integral(e2, ps)));
    }
    std::vector<double> lm, rm;
    for (std::size_t i = 0; i < l.size(); ++i) {
        lm.push_back(l[i].mean);
        rm.push_back(r[i].mean);
    }
    const auto ls = sublinear_expectation(lm);
    const auto rs = sublinear_expectation(rm);
    IsometryReport rep;
    rep.lhs = ls.value;
    rep.rhs = rs.value;
    rep.lhs_index = ls.index;
    rep.rhs_index = rs.index;
    rep.lhs_se = l[ls.index].se;
    rep.rhs_se = r[rs.index].se;
    rep.rel_err = std::abs(rep.lhs - rep.rhs) / std::max(std::abs(rep.rhs), eps);
    return rep;
}

inline std::vector<GPathSet> generate_family(const NoiseBundle& noise, const ScenarioFamily& family) {
    std::vector<GPathSet> sets;
    for (const auto& sc : family.scenarios()) sets.push_back(generate_gbm(noise, sc));
    return sets;
}

inline IsometryReport check_isometry(const AdaptedProcess& eta, const ScenarioFamily& family,
                                     const NoiseBundle& noise, double eps = 1e-300) {
    return check_isometry(eta, generate_family(noise, family), eps);
}

struct BdgReport {
    double lhs = 0.0;       ///< E^[max_k |sum_{j<k} eta_j dB_j|^p]
    double rhs = 0.0;       ///< E^[(sum_j eta_j^2 d<B>_j)^{p/2}]
    double ratio = 0.0;     ///< lhs / rhs, 0 when both vanish
    double constant = 0.0;  ///< C_p
    double se = 0.0;        ///< combined SE of lhs - C_p rhs
    bool holds = false;     ///< lhs <= C_p rhs + 3 se
};

/// C_2 = 4 is Doob's L^2 maximal constant; C_4 = 36 is the documented admissible
/// constant for the fourth moment.
inline double bdg_constant(double p) {
    if (p == 2.0) return 4.0;
    if (p == 4.0) return 36.0;
    throw Error(Errc::unsupported, "check_bdg: only p in {2, 4} is supported");
}

inline BdgReport check_bdg(const AdaptedProcess& eta, double p, std::span<const GPathSet> sets) {
    const double cp = bdg_constant(p);
    std::vector<MeanSe> l, r;
    for (const auto& ps : sets) {
        const Matrix e = eta(ps);
        detail::check_eta_shape(e, ps);
        std::vector<double> sup_pow(ps.m_paths()), qv_pow(ps.m_paths());
        for (std::size_t i = 0; i < ps.m_paths(); ++i) {
            const auto b = ps.b_paths.row(i);
            const auto q = ps.qv_paths.row(i);
            const auto ei = e.row(i);
            double m = 0.0, best = 0.0, acc_q = 0.0;
            for (std::size_t k = 0; k < ei.size(); ++k) {
                m += ei[k] * (b[k + 1] - b[k]);
                acc_q += ei[k] * ei[k] * (q[k + 1] - q[k]);
                best = std::max(best, std::abs(m));
            }
            sup_pow[i] = std::pow(best, p);
            qv_pow[i] = std::pow(acc_q, p / 2.0);
        }
        l.push_back(mean_and_se(sup_pow));
        r.push_back(mean_and_se(qv_pow));
    }
    std::vector<double> lm, rm;
    for (std::size_t i = 0; i < l.size(); ++i) {
        lm.push_back(l[i].mean);
        rm.push_back(r[i].mean);
    }
    const auto ls = sublinear_expectation(lm);
    const auto rs = sublinear_expectation(rm);
    BdgReport rep;
    rep.constant = cp;
    rep.lhs = ls.value;
    rep.rhs = rs.value;
    rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : 0.0;
    const double sl = l[ls.index].se;
    const double sr = r[rs.index].se;
    rep.se = std::sqrt(sl * sl + cp * cp * sr * sr);
    rep.holds = rep.lhs <= cp * rep.rhs + 3.0 * rep.se;
    return rep;
}

inline BdgReport check_bdg(const AdaptedProcess& eta, double p, const ScenarioFamily& family,
                           const NoiseBundle& noise) {
    return check_bdg(eta, p, generate_family(noise, family));
}

}  // namespace grelax
