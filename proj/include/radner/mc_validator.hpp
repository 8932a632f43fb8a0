// SPDX-License-Identifier: MIT
//
// Monte Carlo validation of a candidate solution field against the
// probabilistic characterization: the backward-equation residual along
// simulated forward paths, and the martingale properties of the deflated
// stock price and gains processes. Everything is driven by the counter-based
// generator, so a (seed, parameters) pair fixes the batch bit-for-bit.
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "radner/closed_form.hpp"
#include "radner/economy.hpp"
#include "radner/equilibrium.hpp"
#include "radner/generator.hpp"
#include "radner/pde_solver.hpp"

namespace radner::mc {

/// Joint view of the candidate value function and its volatility matrix
/// Z(t, x) = grad(v) sigma. Implementations: grid interpolation of a solved
/// field, and the exact linear-payoff solution.
class FieldSampler {
public:
    virtual ~FieldSampler() = default;
    virtual int components() const = 0;
    virtual int dim() const = 0;
    virtual void values(double t, std::span<const double> x, std::span<double> out) const = 0;
    virtual void z_matrix(double t, std::span<const double> x, generator::ZMatrix& out) const = 0;
};

/// Multilinear interpolation of a solved field (linear in time). Gradient
/// slices are cached for the two bracketing time indices; the cache advances
/// monotonically, so sample times must be nondecreasing between resets.
/// Not safe for concurrent use.
class GridFieldSampler : public FieldSampler {
public:
    GridFieldSampler(const pde::SolutionField& field, economy::ScaledEconomy econ);

    int components() const override { return field_->components; }
    int dim() const override { return field_->grid.dim; }
    void values(double t, std::span<const double> x, std::span<double> out) const override;
    void z_matrix(double t, std::span<const double> x, generator::ZMatrix& out) const override;

private:
    void ensure_slices(int lo) const;
    void interpolate(double t, std::span<const double> x, bool want_gradient,
                     std::span<double> out_v, std::vector<double>* out_grad) const;

    const pde::SolutionField* field_;
    economy::ScaledEconomy econ_;
    mutable int cached_lo_ = -1;
    mutable std::vector<double> grad_lo_, grad_hi_;
};

/// Exact sampler for the linear-payoff economy.
class GaussianFieldSampler : public FieldSampler {
public:
    explicit GaussianFieldSampler(closed_form::GaussianSpec spec);

    int components() const override { return static_cast<int>(spec_.b_agents.size()) + 1; }
    int dim() const override { return static_cast<int>(spec_.b0.size()); }
    void values(double t, std::span<const double> x, std::span<double> out) const override;
    void z_matrix(double t, std::span<const double> x, generator::ZMatrix& out) const override;

private:
    closed_form::GaussianSpec spec_;
};

struct PathBatch {
    int n_paths = 0;
    int n_steps = 0;
    int dim = 0;
    int components = 0;
    std::uint64_t seed = 0;
    int exit_count = 0;  // paths that hit the truncation box

    // Layouts: x[(p * (n_steps+1) + k) * dim + j], dw likewise with n_steps,
    // v[(p * (n_steps+1) + k) * components + c], z adds a trailing dim index.
    std::vector<double> x, dw, v, z;
    std::vector<int> exit_step;  // -1 when the path never left the box

    double dt() const { return 1.0 / n_steps; }
    const double* x_at(int p, int k) const {
        return x.data() + (static_cast<std::size_t>(p) * (n_steps + 1) + k) * dim;
    }
    const double* dw_at(int p, int k) const {
        return dw.data() + (static_cast<std::size_t>(p) * n_steps + k) * dim;
    }
    const double* v_at(int p, int k) const {
        return v.data() + (static_cast<std::size_t>(p) * (n_steps + 1) + k) * components;
    }
    const double* z_at(int p, int k) const {
        return z.data() +
               ((static_cast<std::size_t>(p) * (n_steps + 1) + k) * components) * dim;
    }
};

struct SimulateOptions {
    int n_paths = 10000;
    int n_steps = 400;
    std::uint64_t seed = 1;
    bool strict = false;           // escalate high exit counts to an error
    double max_exit_fraction = 0.05;
    std::optional<Vec> box_lo, box_hi;  // absorb paths at this box when set
};

/// Euler-Maruyama forward paths from x0 with v and Z sampled along the way.
PathBatch simulate(const economy::MarketModel& model, const FieldSampler& sampler,
                   const SimulateOptions& options);

struct ResidualStats {
    Vec mean_abs;      // per component
    Vec mean_signed;   // per component
    Vec std_error;     // per component, of the signed mean
    double scale = 0.0;  // sup of terminal values over the batch
    double worst_mean_abs_over_scale = 0.0;
    double worst_signed_zscore = 0.0;
};

/// Pathwise residual of the backward equation under the regularized driver.
ResidualStats bsde_residual(const PathBatch& batch, const economy::ScaledEconomy& econ,
                            double reg_n);

struct MartingaleCheck {
    std::string name;
    double z_score = 0.0;
    double sample_mean = 0.0;
    double target = 0.0;
    int excluded_paths = 0;
};

/// Deflator tests: for each agent i, E[Zi_1 S_1] = S_0 and
/// E[Zi_1 (gains)_1] = 0, via sample means and standard errors.
std::vector<MartingaleCheck> martingale_checks(const PathBatch& batch,
                                               std::span<const double> alphas,
                                               double eps_nodal = 1e-8);

/// Aggregate record produced by the validation suite.
struct ValidationReport {
    double residual_mean_abs = 0.0;
    double residual_scale = 0.0;
    double clearing_max_violation = 0.0;
    std::vector<MartingaleCheck> martingale;
    double nodal_fraction = 0.0;
    std::uint64_t seed = 0;
    int n_paths = 0, n_steps = 0;
    int exit_count = 0;
};

}  // namespace radner::mc
