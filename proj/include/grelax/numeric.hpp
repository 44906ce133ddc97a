#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "grelax/error.hpp"

namespace grelax {

/// Dense row-major matrix of doubles. Rows are paths (or time steps), columns are nodes.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<const double> flat() const noexcept { return data_; }

    bool same_shape(const Matrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Pairwise (tree) summation with a fixed leaf size. The association order depends
/// only on the length of the input, so results are reproducible bit for bit.
inline double pairwise_sum(std::span<const double> xs) {
    constexpr std::size_t leaf = 8;
    if (xs.size() <= leaf) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;  ///< standard error of the mean
};

inline MeanSe mean_and_se(std::span<const double> xs) {
    require(!xs.empty(), Errc::no_paths, "no paths");
    const auto n = static_cast<double>(xs.size());
    const double mean = pairwise_sum(xs) / n;
    if (xs.size() == 1) return {mean, 0.0};
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - mean) * (xs[i] - mean);
    const double var = pairwise_sum(sq) / (n - 1.0);
    return {mean, std::sqrt(var / n)};
}

/// Least-squares slope of log(y) against log(x). Points with y <= 0 are skipped;
/// returns NaN when fewer than two usable points remain.
inline double loglog_slope(std::span<const double> xs, std::span<const double> ys) {
    require(xs.size() == ys.size(), Errc::shape_mismatch, "loglog_slope: size mismatch");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (ys[i] > 0.0 && xs[i] > 0.0) {
            lx.push_back(std::log(xs[i]));
            ly.push_back(std::log(ys[i]));
        }
    }
    if (lx.size() < 2) return std::nan("");
    const auto n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace grelax
