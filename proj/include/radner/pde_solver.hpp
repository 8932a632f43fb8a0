// SPDX-License-Identifier: MIT
//
// Backward solver for the coupled semilinear system
//
//   dv_i/dt + L v_i + f_i(x, grad(v) sigma) = 0,   v_i(1, .) = g_i,
//
// on a truncated tensor grid, one component per agent plus the stock slot.
// Time stepping is IMEX: the scalar elliptic operator L (shared by every
// component) is implicit, the nonlinear source and — in d = 2 — the mixed
// second derivative are explicit. Implicit solves are tridiagonal in d = 1
// and alternating-direction (two tridiagonal sweeps) in d = 2. Boundary
// closure is a zero second normal derivative (linear-extrapolation ghosts),
// exact for the asymptotically linear value functions arising here.
#pragma once

#include <string>
#include <vector>

#include "radner/economy.hpp"
#include "radner/generator.hpp"
#include "radner/grid.hpp"

namespace radner::pde {

struct BlowUpError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverOptions {
    double reg_n = 50.0;     // regularization level passed to the driver
    int source_passes = 1;   // 1 = explicit source; 2 adds one fixed-point re-evaluation
    double bound_margin = 9.0;  // abort factor on the tracked sup-norm bound
};

struct SolutionField {
    Grid grid;
    int components = 0;  // I + 1
    double reg_n = 0.0;
    // slices[k][node * components + c], k = 0..n_t (k = n_t is terminal data)
    std::vector<std::vector<double>> slices;
    Vec slice_sup_norms;  // per time index
    double tracked_bound = 0.0;

    double value(int k, int node, int c) const {
        return slices[k][static_cast<std::size_t>(node) * components + c];
    }

    /// Spatial gradient of slice k: central differences at interior nodes,
    /// one-sided second-order stencils at the boundary. Layout:
    /// [node * components * dim + c * dim + axis]. Computed on demand.
    std::vector<double> gradient_slice(int k) const;
};

/// Gradient of an arbitrary nodal function with `components` values per node.
std::vector<double> gradient(const std::vector<double>& slice, const Grid& grid, int components);

/// Mixed derivative d^2 / dx0 dx1 (d = 2 only), one value per node and
/// component, by composing the two one-dimensional stencils.
std::vector<double> mixed_derivative(const std::vector<double>& slice, const Grid& grid,
                                     int components);

/// One IMEX step from the slice at t_next down to t_now.
std::vector<double> step_backward(const std::vector<double>& v_next, double t_next, double t_now,
                                  const economy::ScaledEconomy& econ, const Grid& grid,
                                  const SolverOptions& options);

/// Full backward sweep from t = 1 to t = 0. Deterministic given inputs.
SolutionField solve(const economy::MarketModel& model, const Grid& grid,
                    const SolverOptions& options);

/// Spatial refinement study over nested grids (coarse to fine). Errors are
/// measured on the coarsest grid's nodes at t = 0, against `oracle` when
/// given (values per component at a node) and against the finest solve
/// otherwise. Where consecutive errors sit at the roundoff floor the order
/// is reported as +infinity (the scheme is exact on that problem).
struct ConvergenceReport {
    std::vector<int> resolutions;
    std::vector<Vec> errors;  // per resolution, per component (sup over probe nodes)
    std::vector<Vec> orders;  // per refinement pair, per component
};

using OracleFn =
    std::function<void(double t, std::span<const double> x, std::span<double> values)>;

ConvergenceReport refine_study(const economy::MarketModel& model,
                               const std::vector<Grid>& nested_grids,
                               const SolverOptions& options, OracleFn oracle = nullptr);

}  // namespace radner::pde
