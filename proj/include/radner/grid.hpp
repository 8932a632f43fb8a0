// SPDX-License-Identifier: MIT
#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "radner/economy.hpp"
#include "radner/linalg.hpp"

namespace radner::pde {

struct GridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Uniform tensor grid on a box, d in {1, 2}, with a uniform time step on
/// [0, 1]. Node coordinates are a pure function of (lo, hi, nodes_per_axis).
struct Grid {
    int dim = 0;
    Vec lo, hi;              // per-axis bounds
    int nodes_per_axis = 0;  // >= 3
    int time_steps = 0;      // n_t, dt = 1 / n_t

    Vec spacing;  // per-axis h

    int num_nodes() const {
        int n = 1;
        for (int a = 0; a < dim; ++a) n *= nodes_per_axis;
        return n;
    }
    double dt() const { return 1.0 / time_steps; }
    double time_at(int k) const { return static_cast<double>(k) / time_steps; }

    double coord(int axis, int idx) const { return lo[axis] + idx * spacing[axis]; }

    /// Lexicographic index, axis 0 major: (i, j) -> i * n + j.
    int index2(int i, int j) const { return i * nodes_per_axis + j; }

    void node_coords(int node, std::span<double> out) const {
        if (dim == 1) {
            out[0] = coord(0, node);
        } else {
            out[0] = coord(0, node / nodes_per_axis);
            out[1] = coord(1, node % nodes_per_axis);
        }
    }

    bool contains_strictly(std::span<const double> x) const {
        for (int a = 0; a < dim; ++a)
            if (!(x[a] > lo[a] && x[a] < hi[a])) return false;
        return true;
    }

    /// Index of the node nearest to x (for on-grid lookups).
    int nearest_node(std::span<const double> x) const;
};

Grid build_grid(const Vec& lo, const Vec& hi, int nodes_per_axis, int time_steps,
                std::optional<Vec> x0 = std::nullopt);

/// Default truncation box: x0 +- margin * sqrt(A_jj(0, x0)) per axis
/// (diffusion scale over the unit horizon).
void default_box(const economy::MarketModel& model, double margin, Vec& lo, Vec& hi);

/// Solves a tridiagonal system in place: sub/diag/sup are the three bands
/// (sub[0] and sup[n-1] unused), rhs is overwritten with the solution.
/// No pivoting; intended for the diagonally dominant systems built here.
void solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                       std::span<const double> sup, std::span<double> rhs,
                       std::span<double> scratch);

/// Corners and weights for multilinear interpolation at x, clamped to the box.
struct CellWeights {
    int corners[4] = {0, 0, 0, 0};
    double weights[4] = {0, 0, 0, 0};
    int count = 0;
};

CellWeights locate_cell(const Grid& grid, std::span<const double> x);

}  // namespace radner::pde
