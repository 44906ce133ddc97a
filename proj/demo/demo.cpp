// A short tour: G-normal expectations from the G-heat equation, chattering of the
// half-half relaxed control, and the strict/relaxed gap of the drift-cancellation problem.

#include <cstdio>

#include "grelax/grelax.hpp"

using namespace grelax;

int main() {
    const VolatilityBand band(0.5, 1.0);
    const double horizon = 1.0;

    std::puts("G-normal expectations at T = 1, band [0.5, 1]");
    const auto pde = PdeGrid::padded(0.0, 400, horizon, band);
    for (const char* name : {"square", "neg_square", "abs"}) {
        const double v = gnormal_expectation(make_payoff(name), horizon, 0.0, band, pde);
        std::printf("  E[%-10s(X)] = % .6f\n", name, v);
    }

    std::puts("\nchattering the control (1/2, 1/2) over {-1, 1}: pairing error with t*a");
    const ActionSet U({-1.0, 1.0});
    const RelaxedControl mu(TimeGrid(horizon, 1), Matrix(1, 2, 0.5));
    const auto study = chattering_convergence_study(mu, U, {make_pairing("t_a")}, {2, 4, 8, 16}, 8);
    for (std::size_t i = 0; i < study.errors[0].size(); ++i)
        std::printf("  n = %2zu   error = %.6f   1/(4n) = %.6f\n", std::size_t{2} << i, study.errors[0][i],
                    0.25 / static_cast<double>(std::size_t{2} << i));

    std::puts("\ndrift cancellation: dX = a dt + 0.1 dB, cost E^[int X^2 dt]");
    const TimeGrid coarse(horizon, 4), fine(horizon, 256);
    const auto noise = generate_noise(12345, 1000, fine);
    const auto family = ScenarioFamily::constants(band, fine, {0.5, 1.0});
    const auto rep = gap_report(make_cost("quadratic", {}), make_dynamics("drift_cancellation", {}, 0.0), U, coarse,
                                family, noise, {2, 4, 8, 16, 32});
    std::printf("  best strict  %.6f\n  best relaxed %.6f (se %.1e)\n  gap          %.6f (se %.1e)\n",
                rep.best_strict.cost.value, rep.best_relaxed.value, rep.best_relaxed.se, rep.gap, rep.gap_se);
    for (const auto& r : rep.chattering_curve)
        std::printf("  chattered n = %2zu   J = %.6f\n", r.n, r.value);
    std::printf("  weak duality %s\n", rep.weak_duality ? "holds" : "violated");
    return 0;
}
