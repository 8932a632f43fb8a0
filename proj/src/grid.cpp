// SPDX-License-Identifier: MIT
#include "radner/grid.hpp"

#include <cmath>

namespace radner::pde {

int Grid::nearest_node(std::span<const double> x) const {
    auto nearest = [&](int axis, double v) {
        const double s = (v - lo[axis]) / spacing[axis];
        int idx = static_cast<int>(std::lround(s));
        if (idx < 0) idx = 0;
        if (idx > nodes_per_axis - 1) idx = nodes_per_axis - 1;
        return idx;
    };
    if (dim == 1) return nearest(0, x[0]);
    return index2(nearest(0, x[0]), nearest(1, x[1]));
}

Grid build_grid(const Vec& lo, const Vec& hi, int nodes_per_axis, int time_steps,
                std::optional<Vec> x0) {
    Grid g;
    g.dim = static_cast<int>(lo.size());
    if (g.dim < 1 || g.dim > 2) throw GridError("grid: dimension must be 1 or 2");
    if (hi.size() != lo.size()) throw GridError("grid: lo/hi size mismatch");
    if (nodes_per_axis < 3) throw GridError("grid: need at least 3 nodes per axis");
    if (time_steps < 1) throw GridError("grid: need at least 1 time step");
    g.lo = lo;
    g.hi = hi;
    g.nodes_per_axis = nodes_per_axis;
    g.time_steps = time_steps;
    g.spacing.resize(g.dim);
    for (int a = 0; a < g.dim; ++a) {
        if (!(hi[a] > lo[a])) throw GridError("grid: degenerate box");
        g.spacing[a] = (hi[a] - lo[a]) / (nodes_per_axis - 1);
    }
    if (x0) {
        if (static_cast<int>(x0->size()) != g.dim) throw GridError("grid: x0 dimension mismatch");
        if (!g.contains_strictly(*x0)) throw GridError("grid: x0 not strictly inside the box");
    }
    return g;
}

void default_box(const economy::MarketModel& model, double margin, Vec& lo, Vec& hi) {
    const int d = model.dim_d;
    RowMat sigma(d, d);
    model.vol(0.0, model.x0, sigma.data);
    lo.resize(d);
    hi.resize(d);
    for (int a = 0; a < d; ++a) {
        double a_diag = 0.0;  // (sigma sigma^T)_aa
        for (int j = 0; j < d; ++j) a_diag += sigma.at(a, j) * sigma.at(a, j);
        const double spread = margin * std::sqrt(a_diag);
        lo[a] = model.x0[a] - spread;
        hi[a] = model.x0[a] + spread;
    }
}

CellWeights locate_cell(const Grid& grid, std::span<const double> x) {
    CellWeights cw;
    auto clamp01 = [](double s) { return s < 0.0 ? 0.0 : (s > 1.0 ? 1.0 : s); };
    auto axis_pos = [&](int axis, int& idx, double& w) {
        const double s = (x[axis] - grid.lo[axis]) / grid.spacing[axis];
        idx = static_cast<int>(std::floor(s));
        if (idx < 0) idx = 0;
        if (idx > grid.nodes_per_axis - 2) idx = grid.nodes_per_axis - 2;
        w = clamp01(s - idx);
    };
    if (grid.dim == 1) {
        int i;
        double w;
        axis_pos(0, i, w);
        cw.count = 2;
        cw.corners[0] = i;
        cw.corners[1] = i + 1;
        cw.weights[0] = 1.0 - w;
        cw.weights[1] = w;
        return cw;
    }
    int i, j;
    double wi, wj;
    axis_pos(0, i, wi);
    axis_pos(1, j, wj);
    cw.count = 4;
    cw.corners[0] = grid.index2(i, j);
    cw.corners[1] = grid.index2(i, j + 1);
    cw.corners[2] = grid.index2(i + 1, j);
    cw.corners[3] = grid.index2(i + 1, j + 1);
    cw.weights[0] = (1.0 - wi) * (1.0 - wj);
    cw.weights[1] = (1.0 - wi) * wj;
    cw.weights[2] = wi * (1.0 - wj);
    cw.weights[3] = wi * wj;
    return cw;
}

void solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                       std::span<const double> sup, std::span<double> rhs,
                       std::span<double> scratch) {
    const std::size_t n = diag.size();
    double beta = diag[0];
    rhs[0] /= beta;
    for (std::size_t m = 1; m < n; ++m) {
        scratch[m] = sup[m - 1] / beta;
        beta = diag[m] - sub[m] * scratch[m];
        rhs[m] = (rhs[m] - sub[m] * rhs[m - 1]) / beta;
    }
    for (std::size_t m = n - 1; m-- > 0;) rhs[m] -= scratch[m + 1] * rhs[m + 1];
}

}  // namespace radner::pde
