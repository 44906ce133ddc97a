#pragma once

#include <stdexcept>
#include <string>

namespace grelax {

/// Failure categories raised by the library. Every throw site uses one of these.
enum class Errc {
    invalid_argument,
    empty_family,
    no_paths,
    unstable_grid,
    bad_payoff,
    out_of_band,
    shape_mismatch,
    grid_mismatch,
    out_of_range,
    h1_violated,
    h2_violated,
    instance_too_large,
    unsupported,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

inline void require(bool condition, Errc code, const std::string& what) {
    if (!condition) throw Error(code, what);
}

}  // namespace grelax
