#pragma once

/**
 * @file registry.hpp
 * @brief Named parametric families of coefficients, costs, payoffs and pairing test
 *        functions, selected by name from a config.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "grelax/error.hpp"
#include "grelax/gsde.hpp"
#include "grelax/relaxed_control.hpp"
#include "grelax/robust_cost.hpp"

namespace grelax {

using Params = std::map<std::string, double>;
using Payoff = std::function<double(double)>;

namespace detail {

/// Defaults overlaid by `given`; keys outside `defaults` are rejected.
inline Params merge_params(const std::string& what, const Params& defaults, const Params& given) {
    Params out = defaults;
    for (const auto& [k, v] : given) {
        require(defaults.count(k) != 0, Errc::invalid_argument, what + ": unknown parameter '" + k + "'");
        require(std::isfinite(v), Errc::invalid_argument, what + ": parameter '" + k + "' must be finite");
        out[k] = v;
    }
    return out;
}

/// c_0 + c_1 x + ... with coefficients read from keys prefix0 .. prefix4.
inline std::vector<double> poly_coeffs(const Params& p, const std::string& prefix) {
    std::vector<double> c;
    for (int i = 0; i <= 4; ++i) c.push_back(p.at(prefix + std::to_string(i)));
    return c;
}

inline double horner(const std::vector<double>& c, double x) {
    double v = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) v = v * x + c[i];
    return v;
}

inline void add_poly_keys(Params& p, const std::string& prefix) {
    for (int i = 0; i <= 4; ++i) p[prefix + std::to_string(i)] = 0.0;
}

}  // namespace detail

inline std::vector<std::string> dynamics_names() { return {"linear", "affine_action", "drift_cancellation", "polynomial"}; }

/// Dynamics families:
///   linear:             b = kappa x + beta a,        sigma = sigma,  gamma = gamma a
///   affine_action:      b = b0 + b1 a,               sigma = sigma,  gamma = g0 + g1 a
///   drift_cancellation: b = a,                       sigma = epsilon, gamma = 0
///   polynomial:         b = sum b_i x^i + ba a,      sigma = sum s_i x^i,  gamma = sum g_i x^i + ga a
inline AnyGsdeSpec make_dynamics(const std::string& name, const Params& given, double x0) {
    const std::string what = "dynamics '" + name + "'";
    if (name == "linear") {
        const auto p = detail::merge_params(
            what, {{"kappa", 0.0}, {"beta", 1.0}, {"sigma", 0.1}, {"gamma", 0.0}, {"bound", 10.0}}, given);
        const double kappa = p.at("kappa"), beta = p.at("beta"), sigma = p.at("sigma"), gamma = p.at("gamma");
        return AnyGsdeSpec{[=](double, double x, double a) { return kappa * x + beta * a; },
                           [=](double, double) { return sigma; }, [=](double, double, double a) { return gamma * a; },
                           x0, p.at("bound"), std::abs(kappa)};
    }
    if (name == "affine_action") {
        const auto p = detail::merge_params(
            what, {{"b0", 0.0}, {"b1", 1.0}, {"sigma", 0.1}, {"g0", 0.0}, {"g1", 0.0}, {"bound", 10.0}}, given);
        const double b0 = p.at("b0"), b1 = p.at("b1"), sigma = p.at("sigma"), g0 = p.at("g0"), g1 = p.at("g1");
        return AnyGsdeSpec{[=](double, double, double a) { return b0 + b1 * a; },
                           [=](double, double) { return sigma; },
                           [=](double, double, double a) { return g0 + g1 * a; }, x0, p.at("bound"), 0.0};
    }
    if (name == "drift_cancellation") {
        const auto p = detail::merge_params(what, {{"epsilon", 0.1}, {"bound", 1.0}}, given);
        const double eps = p.at("epsilon");
        return AnyGsdeSpec{[](double, double, double a) { return a; }, [=](double, double) { return eps; },
                           [](double, double, double) { return 0.0; }, x0, p.at("bound"), 0.0};
    }
    if (name == "polynomial") {
        Params defaults{{"ba", 0.0}, {"ga", 0.0}, {"bound", 10.0}, {"lipschitz", 0.0}};
        for (const char* pre : {"b", "s", "g"}) detail::add_poly_keys(defaults, pre);
        const auto p = detail::merge_params(what, defaults, given);
        const auto bc = detail::poly_coeffs(p, "b"), sc = detail::poly_coeffs(p, "s"), gc = detail::poly_coeffs(p, "g");
        const double ba = p.at("ba"), ga = p.at("ga");
        return AnyGsdeSpec{[=](double, double x, double a) { return detail::horner(bc, x) + ba * a; },
                           [=](double, double x) { return detail::horner(sc, x); },
                           [=](double, double x, double a) { return detail::horner(gc, x) + ga * a; }, x0,
                           p.at("bound"), p.at("lipschitz")};
    }
    throw Error(Errc::invalid_argument, "unknown dynamics '" + name + "'");
}

inline std::vector<std::string> cost_names() { return {"quadratic", "constant", "polynomial"}; }

/// Cost families:
///   quadratic:  f = q (x - target)^2 + r a^2,          h = qT (x - target)^2
///   constant:   f = c,                                  h = cT
///   polynomial: f = sum f_i x^i + fa a + faa a^2,       h = sum h_i x^i
inline AnyCostSpec make_cost(const std::string& name, const Params& given) {
    const std::string what = "cost '" + name + "'";
    if (name == "quadratic") {
        const auto p = detail::merge_params(
            what, {{"q", 1.0}, {"r", 0.0}, {"target", 0.0}, {"qT", 0.0}, {"bound", 100.0}}, given);
        const double q = p.at("q"), r = p.at("r"), target = p.at("target"), qt = p.at("qT");
        return AnyCostSpec{[=](double, double x, double a) { return q * (x - target) * (x - target) + r * a * a; },
                           [=](double x) { return qt * (x - target) * (x - target); }, p.at("bound")};
    }
    if (name == "constant") {
        const auto p = detail::merge_params(what, {{"c", 0.0}, {"cT", 0.0}, {"bound", 1.0}}, given);
        const double c = p.at("c"), ct = p.at("cT");
        return AnyCostSpec{[=](double, double, double) { return c; }, [=](double) { return ct; }, p.at("bound")};
    }
    if (name == "polynomial") {
        Params defaults{{"fa", 0.0}, {"faa", 0.0}, {"bound", 100.0}};
        detail::add_poly_keys(defaults, "f");
        detail::add_poly_keys(defaults, "h");
        const auto p = detail::merge_params(what, defaults, given);
        const auto fc = detail::poly_coeffs(p, "f"), hc = detail::poly_coeffs(p, "h");
        const double fa = p.at("fa"), faa = p.at("faa");
        return AnyCostSpec{[=](double, double x, double a) { return detail::horner(fc, x) + fa * a + faa * a * a; },
                           [=](double x) { return detail::horner(hc, x); }, p.at("bound")};
    }
    throw Error(Errc::invalid_argument, "unknown cost '" + name + "'");
}

inline std::vector<std::string> payoff_names() {
    return {"square", "neg_square", "identity", "cube", "abs", "cos", "indicator_positive", "call"};
}

/// Payoffs phi(x); `cos` reads frequency k, `call` reads strike K.
inline Payoff make_payoff(const std::string& name, const Params& given = {}) {
    const std::string what = "payoff '" + name + "'";
    if (name == "cos") {
        const double k = detail::merge_params(what, {{"k", 1.0}}, given).at("k");
        return [k](double x) { return std::cos(k * x); };
    }
    if (name == "call") {
        const double strike = detail::merge_params(what, {{"K", 0.0}}, given).at("K");
        return [strike](double x) { return std::max(x - strike, 0.0); };
    }
    static const std::map<std::string, double (*)(double)> plain{
        {"square", [](double x) { return x * x; }},
        {"neg_square", [](double x) { return -x * x; }},
        {"identity", [](double x) { return x; }},
        {"cube", [](double x) { return x * x * x; }},
        {"abs", [](double x) { return std::abs(x); }},
        {"indicator_positive", [](double x) { return x > 0.0 ? 1.0 : 0.0; }}};
    if (const auto it = plain.find(name); it != plain.end()) {
        detail::merge_params(what, {}, given);
        return it->second;
    }
    throw Error(Errc::invalid_argument, "unknown payoff '" + name + "'");
}

inline std::vector<std::string> pairing_names() { return {"t_a", "sin_2pi_t_a", "t2_a"}; }

inline PairingFunction make_pairing(const std::string& name) {
    if (name == "t_a") return [](double t, double a) { return t * a; };
    if (name == "sin_2pi_t_a") return [](double t, double a) { return std::sin(2.0 * std::numbers::pi * t) * a; };
    if (name == "t2_a") return [](double t, double a) { return t * t * a; };
    throw Error(Errc::invalid_argument, "unknown pairing function '" + name + "'");
}

}  // namespace grelax
