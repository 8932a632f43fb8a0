// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace radner {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm_sq(std::span<const double> a) { return dot(a, a); }

inline double norm(std::span<const double> a) { return std::sqrt(norm_sq(a)); }

inline bool all_finite(std::span<const double> a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

/// Row-major (rows x cols) matrix of doubles. Rows are the natural unit
/// here: volatility rows, gradient rows, z-matrix rows.
struct RowMat {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    RowMat() = default;
    RowMat(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double* row(int i) { return data.data() + static_cast<std::size_t>(i) * cols; }
    const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * cols; }
    std::span<double> row_span(int i) { return {row(i), static_cast<std::size_t>(cols)}; }
    std::span<const double> row_span(int i) const { return {row(i), static_cast<std::size_t>(cols)}; }

    double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

    double frobenius_norm() const { return norm(data); }
};

}  // namespace radner
