#pragma once

#include <cmath>
#include <cstddef>

#include "grelax/error.hpp"

namespace grelax {

/// Uniform partition 0 = t_0 < t_1 < ... < t_n = T.
class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t n_steps) : horizon_(horizon), n_steps_(n_steps) {
        require(std::isfinite(horizon) && horizon > 0.0, Errc::invalid_argument,
                "time grid: horizon must be positive");
        require(n_steps >= 1, Errc::invalid_argument, "time grid: n_steps must be >= 1");
    }

    double horizon() const noexcept { return horizon_; }
    std::size_t n_steps() const noexcept { return n_steps_; }
    double dt() const noexcept { return horizon_ / static_cast<double>(n_steps_); }

    double node(std::size_t k) const noexcept {
        return k == n_steps_ ? horizon_ : static_cast<double>(k) * dt();
    }

    /// True when this grid subdivides `coarse` (same horizon, step count a multiple).
    bool refines(const TimeGrid& coarse) const noexcept {
        return horizon_ == coarse.horizon_ && n_steps_ % coarse.n_steps_ == 0;
    }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    double horizon_;
    std::size_t n_steps_;
};

}  // namespace grelax
