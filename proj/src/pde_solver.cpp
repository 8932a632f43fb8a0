// SPDX-License-Identifier: MIT
#include "radner/pde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "radner/parallel.hpp"

namespace radner::pde {

namespace {

// One-dimensional first-derivative stencil along `axis`, second order at
// interior and boundary nodes. Exact on per-axis linear functions.
inline double axis_derivative(const std::vector<double>& slice, const Grid& grid, int components,
                              int node, int c, int axis) {
    const int n = grid.nodes_per_axis;
    const double h = grid.spacing[axis];
    const int stride_nodes = (grid.dim == 2 && axis == 0) ? n : 1;
    const int stride = stride_nodes * components;
    const std::size_t base = static_cast<std::size_t>(node) * components + c;

    int pos;  // index along the axis
    if (grid.dim == 1) {
        pos = node;
    } else {
        pos = (axis == 0) ? node / n : node % n;
    }

    const double* v = slice.data();
    if (pos == 0)
        return (-3.0 * v[base] + 4.0 * v[base + stride] - v[base + 2 * stride]) / (2.0 * h);
    if (pos == n - 1)
        return (3.0 * v[base] - 4.0 * v[base - stride] + v[base - 2 * stride]) / (2.0 * h);
    return (v[base + stride] - v[base - stride]) / (2.0 * h);
}

}  // namespace

std::vector<double> gradient(const std::vector<double>& slice, const Grid& grid, int components) {
    const int nodes = grid.num_nodes();
    const int d = grid.dim;
    std::vector<double> out(static_cast<std::size_t>(nodes) * components * d);
    parallel_for(0, nodes, [&](int node) {
        for (int c = 0; c < components; ++c)
            for (int axis = 0; axis < d; ++axis)
                out[(static_cast<std::size_t>(node) * components + c) * d + axis] =
                    axis_derivative(slice, grid, components, node, c, axis);
    });
    return out;
}

std::vector<double> mixed_derivative(const std::vector<double>& slice, const Grid& grid,
                                     int components) {
    if (grid.dim != 2) throw GridError("mixed_derivative: requires d = 2");
    const int nodes = grid.num_nodes();
    // First differentiate along axis 1, then along axis 0.
    std::vector<double> d1(static_cast<std::size_t>(nodes) * components);
    parallel_for(0, nodes, [&](int node) {
        for (int c = 0; c < components; ++c)
            d1[static_cast<std::size_t>(node) * components + c] =
                axis_derivative(slice, grid, components, node, c, 1);
    });
    std::vector<double> out(static_cast<std::size_t>(nodes) * components);
    parallel_for(0, nodes, [&](int node) {
        for (int c = 0; c < components; ++c)
            out[static_cast<std::size_t>(node) * components + c] =
                axis_derivative(d1, grid, components, node, c, 0);
    });
    return out;
}

std::vector<double> SolutionField::gradient_slice(int k) const {
    return gradient(slices[k], grid, components);
}

namespace {

// Explicit source at (t, .) from the regularized driver: s = f_n(x, grad(v) sigma).
void evaluate_source(const std::vector<double>& slice, double t,
                     const economy::ScaledEconomy& econ, const Grid& grid, double reg_n,
                     std::vector<double>& source) {
    const int d = grid.dim;
    const int agents = econ.num_agents();
    const int components = agents + 1;
    const int nodes = grid.num_nodes();
    const std::vector<double> grad = gradient(slice, grid, components);
    source.resize(static_cast<std::size_t>(nodes) * components);

    const generator::RegularizationParams params{reg_n};
    parallel_for(0, nodes, [&](int node) {
        double xbuf[2];
        double sigbuf[4];
        std::span<double> x(xbuf, static_cast<std::size_t>(d));
        std::span<double> sig(sigbuf, static_cast<std::size_t>(d) * d);
        grid.node_coords(node, x);
        econ.model.vol(t, x, sig);

        generator::ZMatrix z(agents, d);
        const double* g = grad.data() + static_cast<std::size_t>(node) * components * d;
        for (int c = 0; c < components; ++c)
            for (int l = 0; l < d; ++l) {
                double acc = 0.0;
                for (int j = 0; j < d; ++j) acc += g[c * d + j] * sigbuf[j * d + l];
                z.row(c)[l] = acc;
            }
        generator::eval_regularized(
            x, z, params, econ.alphas,
            std::span<double>(source.data() + static_cast<std::size_t>(node) * components,
                              components));
    });
}

// Adds dt * A01 * (d^2 v / dx0 dx1) to the right-hand side (d = 2 only).
void add_cross_terms(const std::vector<double>& v_next, double t_next,
                     const economy::ScaledEconomy& econ, const Grid& grid, int components,
                     double dt, std::vector<double>& rhs) {
    const std::vector<double> mixed = mixed_derivative(v_next, grid, components);
    const int nodes = grid.num_nodes();
    parallel_for(0, nodes, [&](int node) {
        double xbuf[2];
        double sigbuf[4];
        std::span<double> x(xbuf, 2);
        grid.node_coords(node, x);
        econ.model.vol(t_next, x, std::span<double>(sigbuf, 4));
        // A = sigma sigma^T; the off-diagonal entry weights the mixed term.
        const double a01 = sigbuf[0] * sigbuf[2] + sigbuf[1] * sigbuf[3];
        if (a01 == 0.0) return;
        for (int c = 0; c < components; ++c)
            rhs[static_cast<std::size_t>(node) * components + c] +=
                dt * a01 * mixed[static_cast<std::size_t>(node) * components + c];
    });
}

// Implicit sweep of (I - dt * L_axis) along one axis, all lines and all
// components. L_axis = (A_aa / 2) d^2/dx_a^2 + b_a d/dx_a with
// zero-second-derivative boundary closure.
void implicit_axis_sweep(std::vector<double>& values, double t, const economy::ScaledEconomy& econ,
                         const Grid& grid, int components, double dt, int axis) {
    const int n = grid.nodes_per_axis;
    const int d = grid.dim;
    const double h = grid.spacing[axis];
    const int num_lines = (d == 1) ? 1 : n;

    parallel_for(0, num_lines, [&](int line) {
        std::vector<double> sub(n), diag(n), sup(n), rhs(n), scratch(n);
        double xbuf[2];
        double sigbuf[4];
        std::span<double> x(xbuf, static_cast<std::size_t>(d));
        double bbuf[2];
        std::span<double> b(bbuf, static_cast<std::size_t>(d));

        // Node index of position m along this line.
        auto node_at = [&](int m) {
            if (d == 1) return m;
            return (axis == 0) ? grid.index2(m, line) : grid.index2(line, m);
        };

        for (int m = 0; m < n; ++m) {
            grid.node_coords(node_at(m), x);
            econ.model.vol(t, x, std::span<double>(sigbuf, static_cast<std::size_t>(d) * d));
            econ.model.drift(t, x, b);
            double a_diag = 0.0;
            for (int j = 0; j < d; ++j) a_diag += sigbuf[axis * d + j] * sigbuf[axis * d + j];
            const double diff = 0.5 * a_diag / (h * h);
            const double adv = bbuf[axis] / (2.0 * h);
            if (m == 0) {
                // ghost v_{-1} = 2 v_0 - v_1: diffusion drops, drift one-sided
                diag[m] = 1.0 + dt * 2.0 * adv;
                sup[m] = -dt * 2.0 * adv;
                sub[m] = 0.0;
            } else if (m == n - 1) {
                diag[m] = 1.0 - dt * 2.0 * adv;
                sub[m] = dt * 2.0 * adv;
                sup[m] = 0.0;
            } else {
                sub[m] = -dt * (diff - adv);
                diag[m] = 1.0 + dt * 2.0 * diff;
                sup[m] = -dt * (diff + adv);
            }
        }

        for (int c = 0; c < components; ++c) {
            for (int m = 0; m < n; ++m)
                rhs[m] = values[static_cast<std::size_t>(node_at(m)) * components + c];
            solve_tridiagonal(sub, diag, sup, rhs, scratch);
            for (int m = 0; m < n; ++m)
                values[static_cast<std::size_t>(node_at(m)) * components + c] = rhs[m];
        }
    });
}

double slice_sup_norm(const std::vector<double>& slice) {
    double sup = 0.0;
    for (double v : slice) sup = std::max(sup, std::fabs(v));
    return sup;
}

void check_slice(const std::vector<double>& slice, const Grid& grid, int components, double bound,
                 double t) {
    for (std::size_t idx = 0; idx < slice.size(); ++idx) {
        const double v = slice[idx];
        if (!std::isfinite(v) || std::fabs(v) > bound) {
            const int node = static_cast<int>(idx) / components;
            double xbuf[2];
            grid.node_coords(node, std::span<double>(xbuf, static_cast<std::size_t>(grid.dim)));
            throw BlowUpError("solver blow-up at t=" + std::to_string(t) +
                              " node=" + std::to_string(node) + " x0=" + std::to_string(xbuf[0]));
        }
    }
}

std::vector<double> imex_step(const std::vector<double>& v_next, double t_next, double t_now,
                              const economy::ScaledEconomy& econ, const Grid& grid,
                              const SolverOptions& options) {
    const int components = econ.num_agents() + 1;
    const double dt = t_next - t_now;

    std::vector<double> source;
    evaluate_source(v_next, t_next, econ, grid, options.reg_n, source);

    std::vector<double> result;
    for (int pass = 0; pass < std::max(1, options.source_passes); ++pass) {
        if (pass > 0) evaluate_source(result, t_now, econ, grid, options.reg_n, source);
        std::vector<double> rhs = v_next;
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += dt * source[i];
        if (grid.dim == 2) add_cross_terms(v_next, t_next, econ, grid, components, dt, rhs);

        implicit_axis_sweep(rhs, t_now, econ, grid, components, dt, 0);
        if (grid.dim == 2) implicit_axis_sweep(rhs, t_now, econ, grid, components, dt, 1);
        result = std::move(rhs);
    }
    return result;
}

}  // namespace

std::vector<double> step_backward(const std::vector<double>& v_next, double t_next, double t_now,
                                  const economy::ScaledEconomy& econ, const Grid& grid,
                                  const SolverOptions& options) {
    if (!all_finite(v_next)) throw BlowUpError("step_backward: non-finite input slice");
    return imex_step(v_next, t_next, t_now, econ, grid, options);
}

SolutionField solve(const economy::MarketModel& model, const Grid& grid,
                    const SolverOptions& options) {
    if (!(options.reg_n > 0.0)) throw std::invalid_argument("solve: reg_n must be > 0");
    if (!grid.contains_strictly(model.x0)) throw GridError("solve: x0 not inside the grid box");
    const economy::ScaledEconomy econ = economy::scale_economy(model);

    const int components = econ.num_agents() + 1;
    const int nodes = grid.num_nodes();
    const int nt = grid.time_steps;

    SolutionField field;
    field.grid = grid;
    field.components = components;
    field.reg_n = options.reg_n;
    field.slices.resize(nt + 1);
    field.slice_sup_norms.assign(nt + 1, 0.0);

    // Terminal slice: sampled scaled payoffs, exactly.
    std::vector<double> terminal(static_cast<std::size_t>(nodes) * components);
    for (int node = 0; node < nodes; ++node) {
        double xbuf[2];
        std::span<double> x(xbuf, static_cast<std::size_t>(grid.dim));
        grid.node_coords(node, x);
        for (int c = 0; c < components; ++c)
            terminal[static_cast<std::size_t>(node) * components + c] =
                econ.terminal_component(c, x);
    }
    const double terminal_sup = slice_sup_norm(terminal);
    field.tracked_bound = (1.0 + options.bound_margin) * (terminal_sup + 1.0);
    check_slice(terminal, grid, components, field.tracked_bound, 1.0);
    field.slice_sup_norms[nt] = terminal_sup;
    field.slices[nt] = std::move(terminal);

    for (int k = nt - 1; k >= 0; --k) {
        const double t_next = grid.time_at(k + 1);
        const double t_now = grid.time_at(k);
        field.slices[k] = imex_step(field.slices[k + 1], t_next, t_now, econ, grid, options);
        check_slice(field.slices[k], grid, components, field.tracked_bound, t_now);
        field.slice_sup_norms[k] = slice_sup_norm(field.slices[k]);
    }
    return field;
}

ConvergenceReport refine_study(const economy::MarketModel& model,
                               const std::vector<Grid>& nested_grids,
                               const SolverOptions& options, OracleFn oracle) {
    if (nested_grids.size() < 3)
        throw std::invalid_argument("refine_study: need at least 3 nested grids");
    for (std::size_t g = 1; g < nested_grids.size(); ++g) {
        const Grid& coarse = nested_grids[g - 1];
        const Grid& fine = nested_grids[g];
        if (coarse.dim != fine.dim || coarse.lo != fine.lo || coarse.hi != fine.hi)
            throw std::invalid_argument("refine_study: grids must share the box");
        if ((fine.nodes_per_axis - 1) % (coarse.nodes_per_axis - 1) != 0)
            throw std::invalid_argument("refine_study: grids are not nested");
    }

    std::vector<SolutionField> fields;
    fields.reserve(nested_grids.size());
    for (const Grid& g : nested_grids) fields.push_back(solve(model, g, options));

    const Grid& probe = nested_grids.front();
    const int components = fields.front().components;
    const int probe_nodes = probe.num_nodes();

    auto value_on = [&](const SolutionField& f, std::span<const double> x, int c) {
        return f.value(0, f.grid.nearest_node(x), c);
    };
    // Errors are sampled on the inner half of the box: the truncation
    // closure contributes a resolution-independent error near the boundary
    // that would mask the interior order.
    auto inner = [&](std::span<const double> x) {
        for (int a = 0; a < probe.dim; ++a) {
            const double span = probe.hi[a] - probe.lo[a];
            if (x[a] < probe.lo[a] + 0.25 * span || x[a] > probe.hi[a] - 0.25 * span)
                return false;
        }
        return true;
    };

    ConvergenceReport report;
    for (std::size_t g = 0; g < nested_grids.size(); ++g) {
        report.resolutions.push_back(nested_grids[g].nodes_per_axis);
        Vec err(components, 0.0);
        for (int node = 0; node < probe_nodes; ++node) {
            double xbuf[2];
            std::span<double> x(xbuf, static_cast<std::size_t>(probe.dim));
            probe.node_coords(node, x);
            if (!inner(x)) continue;
            Vec ref(components);
            if (oracle) {
                oracle(0.0, x, ref);
            } else {
                if (g + 1 == nested_grids.size()) continue;  // finest is the reference
                for (int c = 0; c < components; ++c) ref[c] = value_on(fields.back(), x, c);
            }
            for (int c = 0; c < components; ++c)
                err[c] = std::max(err[c], std::fabs(value_on(fields[g], x, c) - ref[c]));
        }
        report.errors.push_back(std::move(err));
    }
    if (!oracle) report.errors.pop_back();  // finest has no self-error

    const double scale = fields.front().slice_sup_norms.back();
    const double floor = 1e-11 * (1.0 + scale);
    for (std::size_t g = 1; g < report.errors.size(); ++g) {
        const double ratio = static_cast<double>(nested_grids[g].nodes_per_axis - 1) /
                             (nested_grids[g - 1].nodes_per_axis - 1);
        Vec order(components, 0.0);
        for (int c = 0; c < components; ++c) {
            const double e0 = report.errors[g - 1][c];
            const double e1 = report.errors[g][c];
            if (e1 <= floor)
                order[c] = std::numeric_limits<double>::infinity();
            else
                order[c] = std::log(e0 / e1) / std::log(ratio);
        }
        report.orders.push_back(std::move(order));
    }
    return report;
}

}  // namespace radner::pde
