#pragma once

/**
 * @file gheat_pde.hpp
 * @brief Explicit monotone finite differences for u_t = G(u_xx), u(0, x) = phi(x).
 *
 * u(t, x) is the G-normal expectation E^[phi(x + sqrt(t) X)]. The scheme advances
 *
 *     u[k+1][i] = u[k][i] + dt * G((u[k][i-1] - 2 u[k][i] + u[k][i+1]) / dx^2)
 *
 * and is monotone under dt <= dx^2 / sigma_max^2. Boundary nodes use a zero second
 * derivative (linear extrapolation), so they keep their initial values. The maximizing
 * volatility at each node is recorded as a bang-bang feedback policy.
 *
 * The equation is posed on the whole line; keep the payoff's region of interest at
 * least 6 sigma_max sqrt(T) away from both grid ends.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>

#include "grelax/error.hpp"
#include "grelax/numeric.hpp"
#include "grelax/scenario_family.hpp"
#include "grelax/time_grid.hpp"

namespace grelax {

class PdeGrid {
public:
    PdeGrid(double x_min, double x_max, std::size_t nx, double horizon, std::size_t nt)
        : space_(x_min, x_max, nx), time_(horizon, nt) {}

    /// Smallest nt satisfying the stability bound for `band`.
    static PdeGrid stable(double x_min, double x_max, std::size_t nx, double horizon,
                          const VolatilityBand& band) {
        const StateGrid s(x_min, x_max, nx);
        const double hi = band.sigma_max();
        const double max_dt = s.dx() * s.dx() / (hi * hi);
        auto nt = static_cast<std::size_t>(std::ceil(horizon / max_dt));
        PdeGrid g(x_min, x_max, nx, horizon, nt);
        while (!g.is_stable(band)) g = PdeGrid(x_min, x_max, nx, horizon, ++nt);
        return g;
    }

    /// Grid padded by 6 sigma_max sqrt(T) around `center`.
    static PdeGrid padded(double center, std::size_t nx, double horizon, const VolatilityBand& band) {
        const double pad = 6.0 * band.sigma_max() * std::sqrt(horizon);
        return stable(center - pad, center + pad, nx, horizon, band);
    }

    const StateGrid& space() const noexcept { return space_; }
    const TimeGrid& time() const noexcept { return time_; }
    std::size_t nx() const noexcept { return space_.nx(); }
    std::size_t nt() const noexcept { return time_.n_steps(); }
    double dx() const noexcept { return space_.dx(); }
    double dt() const noexcept { return time_.dt(); }

    bool is_stable(const VolatilityBand& band) const noexcept {
        const double hi = band.sigma_max();
        return dt() * hi * hi <= dx() * dx();
    }

private:
    StateGrid space_;
    TimeGrid time_;
};

struct ValueSurface {
    PdeGrid grid;
    VolatilityBand band;
    Matrix values;    ///< (nt + 1) x (nx + 1), values(k, i) ~ u(k dt, x_i)
    Matrix feedback;  ///< nt x (nx + 1), entries in {sigma_min, sigma_max}

    /// Bilinear interpolation at (t, x). Throws out_of_range outside the grid.
    double at(double t, double x) const {
        const auto& s = grid.space();
        require(t >= 0.0 && t <= grid.time().horizon() && x >= s.x_min() && x <= s.x_max(), Errc::out_of_range,
                "value surface: (t, x) outside the grid");
        const double ft = t / grid.dt();
        const double fx = (x - s.x_min()) / grid.dx();
        const auto k = std::min(static_cast<std::size_t>(ft), grid.nt() - 1);
        const auto i = std::min(static_cast<std::size_t>(fx), grid.nx() - 1);
        const double wt = std::clamp(ft - static_cast<double>(k), 0.0, 1.0);
        const double wx = std::clamp(fx - static_cast<double>(i), 0.0, 1.0);
        const double lo = (1.0 - wx) * values(k, i) + wx * values(k, i + 1);
        const double hi = (1.0 - wx) * values(k + 1, i) + wx * values(k + 1, i + 1);
        return (1.0 - wt) * lo + wt * hi;
    }
};

inline ValueSurface solve_gheat(const std::function<double(double)>& phi, const VolatilityBand& band,
                                const PdeGrid& grid) {
    require(grid.is_stable(band), Errc::unstable_grid, "unstable grid");
    const std::size_t nx = grid.nx();
    const std::size_t nt = grid.nt();
    ValueSurface out{grid, band, Matrix(nt + 1, nx + 1), Matrix(nt, nx + 1)};

    for (std::size_t i = 0; i <= nx; ++i) {
        const double v = phi(grid.space().node(i));
        require(std::isfinite(v), Errc::bad_payoff, "bad payoff");
        out.values(0, i) = v;
    }

    const double inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    const double dt = grid.dt();
    const double hi = band.sigma_max();
    const double lo = band.sigma_min();
    for (std::size_t k = 0; k < nt; ++k) {
        const auto u = out.values.row(k);
        auto next = out.values.row(k + 1);
        auto fb = out.feedback.row(k);
        for (std::size_t i = 1; i < nx; ++i) {
            const double d2 = ((u[i - 1] - u[i]) + (u[i + 1] - u[i])) * inv_dx2;
            next[i] = u[i] + dt * g_operator(d2, band);
            fb[i] = d2 >= 0.0 ? hi : lo;
        }
        next[0] = u[0];
        next[nx] = u[nx];
        // Boundary second derivative is zero by construction; report the adjacent
        // interior policy there instead of the tie value.
        fb[0] = fb[1];
        fb[nx] = fb[nx - 1];
    }
    return out;
}

/// E^[phi(x + sqrt(t) X)] by solving on `grid` and interpolating at (t, x).
inline double gnormal_expectation(const std::function<double(double)>& phi, double t, double x,
                                  const VolatilityBand& band, const PdeGrid& grid) {
    require(t > 0.0 && t <= grid.time().horizon() && x >= grid.space().x_min() && x <= grid.space().x_max(),
            Errc::out_of_range, "gnormal_expectation: (t, x) outside the grid");
    return solve_gheat(phi, band, grid).at(t, x);
}

/// Worst-case volatility feedback for simulating phi(B_T) forward on `path_grid`.
///
/// On path step j the remaining horizon is tau = T - t_j; the policy reads the PDE
/// row nearest tau (clamped to the last stepping row) at the mapped state
/// `sde_map(B_{t_j})`. The path horizon must not exceed the PDE horizon.
inline VolatilityScenario extract_worst_case_scenario(const ValueSurface& surface, const TimeGrid& path_grid,
                                                      std::optional<StateMap> sde_map = std::nullopt) {
    const auto& g = surface.grid;
    require(path_grid.horizon() <= g.time().horizon() * (1.0 + 1e-12), Errc::out_of_range,
            "extract_worst_case_scenario: path horizon exceeds the PDE horizon");
    const std::size_t cols = g.nx() + 1;
    Matrix table(path_grid.n_steps(), cols);
    for (std::size_t j = 0; j < path_grid.n_steps(); ++j) {
        const double tau = path_grid.horizon() - path_grid.node(j);
        auto k = static_cast<std::size_t>(std::llround(tau / g.dt()));
        k = std::min(k, g.nt() - 1);
        const auto src = surface.feedback.row(k);
        std::copy(src.begin(), src.end(), table.row(j).begin());
    }
    return VolatilityScenario::feedback(surface.band, path_grid,
                                        FeedbackPolicy{g.space(), sde_map.value_or(StateMap{}), std::move(table)});
}

}  // namespace grelax
