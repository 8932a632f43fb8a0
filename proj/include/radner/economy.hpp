// SPDX-License-Identifier: MIT
//
// Economies: one risky asset paying a terminal dividend, agents with
// exponential utility and terminal random endowments, state driven by a
// d-dimensional diffusion. All prices and payoffs here are *unscaled*;
// scale_economy() produces the dimensionless economy the solver works in.
#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "radner/linalg.hpp"

namespace radner::economy {

struct InvalidModel : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Scalar payoff of the terminal state.
using Payoff = std::function<double(std::span<const double> x)>;
/// Drift b(t,x) -> R^d, written into `out`.
using DriftFn = std::function<void(double t, std::span<const double> x, std::span<double> out)>;
/// Volatility sigma(t,x) -> d x d, row-major, written into `out`.
using VolFn = std::function<void(double t, std::span<const double> x, std::span<double> out)>;

/// Set when the diffusion coefficients do not depend on (t,x); lets the
/// analytic oracles use the Gaussian transition kernel directly.
struct ConstantCoefficients {
    Vec drift;     // b, length d
    RowMat sigma;  // d x d
};

struct MarketModel {
    int dim_d = 0;       // Brownian dimension
    int num_agents = 0;  // I
    Vec deltas;          // risk tolerances, one per agent, all > 0

    DriftFn drift;
    VolFn vol;
    Payoff dividend;                // terminal dividend of the stock
    std::vector<Payoff> endowments; // one terminal endowment per agent
    Vec x0;

    std::optional<ConstantCoefficients> constant_coeffs;
    double ellipticity_lambda = 1e-6;

    void eval_drift(double t, std::span<const double> x, std::span<double> out) const {
        drift(t, x, out);
    }
    void eval_vol(double t, std::span<const double> x, RowMat& out) const {
        out.rows = out.cols = dim_d;
        out.data.resize(static_cast<std::size_t>(dim_d) * dim_d);
        vol(t, x, out.data);
    }
};

/// Dimensionless economy: payoffs divided through by risk tolerances, agent
/// weights alpha summing to one.
struct ScaledEconomy {
    Vec alphas;        // alpha_i = delta_i / sum(delta)
    double sum_delta = 0.0;
    Payoff scaled_dividend;               // dividend / sum(delta)
    std::vector<Payoff> scaled_endowments; // endowment_i / delta_i
    MarketModel model;                     // the unscaled economy

    int num_agents() const { return model.num_agents; }
    int dim() const { return model.dim_d; }

    /// Terminal data of the backward system: component 0 is the scaled
    /// dividend, components 1..I the scaled endowments.
    double terminal_component(int component, std::span<const double> x) const {
        return component == 0 ? scaled_dividend(x) : scaled_endowments[component - 1](x);
    }
};

/// Checks structural validity (positive risk tolerances, consistent sizes,
/// finite payoffs at x0). Throws InvalidModel on failure.
void validate_model(const MarketModel& model);

/// Samples the ellipticity bounds lambda |u|^2 <= u^T A u <= |u|^2 / lambda
/// at `samples` random (t, x, u) with x drawn from `box`. Throws on failure.
void probe_ellipticity(const MarketModel& model, const RowMat& box, int samples,
                       std::uint64_t seed);

ScaledEconomy scale_economy(const MarketModel& model);

/// Linear-payoff economy driven by a standard Brownian motion: the scaled
/// dividend is b0.x and the scaled endowment of agent i is b_agents[i].x.
MarketModel make_gaussian_economy(const Vec& b0, const std::vector<Vec>& b_agents,
                                  const Vec& deltas);

/// Two-agent weather economy: state (sigma_w W^1, sigma_w W^2), unscaled
/// dividend x1 + x2, agent 1 holding n_options puts on the second factor
/// (payoff n * max(-x2, 0)), agent 2 short the same options. An optional
/// mollification width smooths the payoff kink over [-eps, eps] along x2
/// with a C^2 transition; width zero keeps the exact hinge.
MarketModel make_put_option_economy(int n_options, double sigma_w, const Vec& deltas,
                                    double mollify_eps = 0.0);

/// Polynomial payoff sum_k coef_k * prod_j x_j^pow[k][j].
struct PolynomialPayoff {
    struct Term {
        double coef = 0.0;
        std::vector<int> powers;
    };
    std::vector<Term> terms;

    double operator()(std::span<const double> x) const;
};

/// Payoff tabulated on a uniform per-axis grid, evaluated by multilinear
/// interpolation (values clamped to the table box). Supports d in {1,2}.
struct TabulatedPayoff {
    Vec lo, hi;               // per-axis bounds
    int nodes_per_axis = 0;   // >= 2
    Vec values;               // lexicographic, axis 0 major

    double operator()(std::span<const double> x) const;
};

/// Hinge max(-s, 0) smoothed over [-eps, eps] by convolution with a
/// quartic bump; reduces to the exact hinge when eps == 0.
double smoothed_negative_part(double s, double eps);

}  // namespace radner::economy
