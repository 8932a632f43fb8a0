// SPDX-License-Identifier: MIT
//
// Analytic reference solutions used to cross-check the PDE solver:
//
//  * the linear-payoff (Gaussian) economy, solvable in closed form;
//  * the complete-market benchmark price under the exponentially tilted
//    measure, for Gaussian aggregate endowment and dividend;
//  * the log-transform identity for the aggregate value in one dimension,
//    evaluated by Gauss-Hermite quadrature;
//  * the certainty equivalent of a purely non-hedgeable endowment.
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "radner/economy.hpp"
#include "radner/linalg.hpp"

namespace radner::closed_form {

struct OracleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Linear-payoff economy in scaled units: dividend b0 . W_1, endowments
/// b_agents[i] . W_1, state X = W.
struct GaussianSpec {
    Vec b0;
    std::vector<Vec> b_agents;
    Vec alphas;
    double sum_delta = 0.0;

    void validate() const;
    static GaussianSpec from_economy(const Vec& b0, const std::vector<Vec>& b_agents,
                                     const Vec& deltas);
};

struct GaussianSolution {
    double stock = 0.0;      // scaled price v_0(t, x)
    Vec agents;              // scaled certainty equivalents v_i(t, x)
    Vec zeta;                // constant b0
    RowMat gammas;           // constant agent rows
    Vec thetas;              // constant positions
};

/// Exact solution of the backward system for the linear-payoff economy;
/// x is read as the Brownian state W_t.
GaussianSolution gaussian_solution(const GaussianSpec& spec, double t, std::span<const double> x);

struct PremiumSummary {
    double premium = 0.0;   // unscaled expected return over the horizon
    double variance = 0.0;  // unscaled dividend variance
};

/// Unscaled premium Cov(sum E_tilde + xi_tilde, xi_tilde) / sum_delta and
/// dividend variance, from the coefficient rows.
PremiumSummary gaussian_premium_unscaled(const GaussianSpec& spec);

/// Scaled complete-market benchmark price at (t, x) for unscaled Gaussian
/// aggregate endowment G_vec . W_1 and dividend xi_vec . W_1:
///   (xi_vec . x) / sum_delta - (1 - t) (xi_vec . G_vec) / sum_delta^2.
double complete_benchmark_gaussian(std::span<const double> g_vec, std::span<const double> xi_vec,
                                   double sum_delta, double t, std::span<const double> x);

/// Gauss-Hermite rule for integrals against exp(-u^2); `n` nodes.
struct QuadratureRule {
    Vec nodes;
    Vec weights;
};
const QuadratureRule& gauss_hermite_rule(int n);

/// E[h(Y)] for Y ~ N(mean, sd^2) by Gauss-Hermite quadrature.
double gaussian_expectation(const std::function<double(double)>& h, double mean, double sd,
                            int quadrature_nodes);

/// -log E[exp(-h(Y))] for Y ~ N(mean, sd^2), evaluated stably in log space.
double log_exp_value(const std::function<double(double)>& h, double mean, double sd,
                     int quadrature_nodes);

/// Aggregate value v_0 + sum_k alpha_k v_k at (t, x) for a one-dimensional
/// constant-coefficient economy: -log E_t[exp(-(scaled dividend +
/// sum_k alpha_k scaled endowment)(X_1))]. Rejects non-constant
/// coefficients and d != 1.
double cole_hopf_aggregate(const economy::MarketModel& model_1d, double t, double x,
                           int quadrature_nodes);

/// Certainty equivalent of a non-hedgeable endowment payoff(W_1) given
/// W_t = x2: -log E[exp(-payoff(W_1)) | W_t = x2].
double nonhedgeable_r2(const std::function<double(double)>& payoff, double t, double x2,
                       int quadrature_nodes);

/// Tilted conditional expectation E[h(Y) e^{-w(Y)}] / E[e^{-w(Y)}] for
/// Y ~ N(mean, sd^2); building block for the separable-economy oracle.
double tilted_expectation(const std::function<double(double)>& h,
                          const std::function<double(double)>& w, double mean, double sd,
                          int quadrature_nodes);

}  // namespace radner::closed_form
