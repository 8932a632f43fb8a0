// SPDX-License-Identifier: MIT
#include "radner/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include <Eigen/Dense>

namespace radner::closed_form {

void GaussianSpec::validate() const {
    if (!(norm(b0) > 0.0)) throw OracleError("gaussian oracle: |b0| must be nonzero");
    if (b_agents.size() != alphas.size())
        throw OracleError("gaussian oracle: agent count mismatch");
    for (const auto& b : b_agents)
        if (b.size() != b0.size()) throw OracleError("gaussian oracle: dimension mismatch");
    if (!(sum_delta > 0.0)) throw OracleError("gaussian oracle: sum_delta must be positive");
}

GaussianSpec GaussianSpec::from_economy(const Vec& b0, const std::vector<Vec>& b_agents,
                                        const Vec& deltas) {
    GaussianSpec spec;
    spec.b0 = b0;
    spec.b_agents = b_agents;
    spec.sum_delta = 0.0;
    for (double d : deltas) spec.sum_delta += d;
    spec.alphas.resize(deltas.size());
    for (std::size_t i = 0; i < deltas.size(); ++i) spec.alphas[i] = deltas[i] / spec.sum_delta;
    spec.validate();
    return spec;
}

GaussianSolution gaussian_solution(const GaussianSpec& spec, double t, std::span<const double> x) {
    spec.validate();
    const int d = static_cast<int>(spec.b0.size());
    const int agents = static_cast<int>(spec.b_agents.size());

    Vec avg(d, 0.0);  // sum_k alpha_k b_k
    for (int i = 0; i < agents; ++i)
        for (int j = 0; j < d; ++j) avg[j] += spec.alphas[i] * spec.b_agents[i][j];

    const double b0_sq = norm_sq(spec.b0);
    const double b0_norm = std::sqrt(b0_sq);

    GaussianSolution sol;
    sol.zeta = spec.b0;
    sol.gammas = RowMat(agents, d);
    sol.agents.resize(agents);
    sol.thetas.resize(agents);

    double drift = 0.0;  // (sum_k alpha_k b_k + b0) . b0
    for (int j = 0; j < d; ++j) drift += (avg[j] + spec.b0[j]) * spec.b0[j];
    sol.stock = (t - 1.0) * drift + dot(spec.b0, x);

    for (int i = 0; i < agents; ++i) {
        const Vec& bi = spec.b_agents[i];
        for (int j = 0; j < d; ++j) sol.gammas.at(i, j) = bi[j];
        double dir = 0.0;  // (b0 + avg - b_i) . b0 / |b0|
        for (int j = 0; j < d; ++j) dir += (spec.b0[j] + avg[j] - bi[j]) * spec.b0[j];
        dir /= b0_norm;
        sol.agents[i] =
            (t - 1.0) * (-0.5 * dir * dir + 0.5 * norm_sq(bi)) + dot(bi, x);
        sol.thetas[i] = (drift - dot(bi, spec.b0)) / b0_sq;
    }
    return sol;
}

PremiumSummary gaussian_premium_unscaled(const GaussianSpec& spec) {
    spec.validate();
    const int d = static_cast<int>(spec.b0.size());
    const int agents = static_cast<int>(spec.b_agents.size());

    // Unscaled coefficient rows: dividend sum_delta * b0, endowments
    // delta_i * b_i with delta_i = alpha_i * sum_delta.
    Vec xi_vec(d), g_sum(d, 0.0);
    for (int j = 0; j < d; ++j) xi_vec[j] = spec.sum_delta * spec.b0[j];
    for (int i = 0; i < agents; ++i) {
        const double delta_i = spec.alphas[i] * spec.sum_delta;
        for (int j = 0; j < d; ++j) g_sum[j] += delta_i * spec.b_agents[i][j];
    }
    PremiumSummary out;
    out.variance = norm_sq(xi_vec);
    double cov = 0.0;  // Cov(sum E_tilde + xi_tilde, xi_tilde)
    for (int j = 0; j < d; ++j) cov += (g_sum[j] + xi_vec[j]) * xi_vec[j];
    out.premium = cov / spec.sum_delta;
    return out;
}

double complete_benchmark_gaussian(std::span<const double> g_vec, std::span<const double> xi_vec,
                                   double sum_delta, double t, std::span<const double> x) {
    // Conditional Gaussian tilt: E_t[e^{-a G} xi] / E_t[e^{-a G}]
    // = E_t[xi] - a Cov_t(G, xi) with a = 1 / sum_delta.
    const double cov = dot(xi_vec, g_vec);
    return dot(xi_vec, x) / sum_delta - (1.0 - t) * cov / (sum_delta * sum_delta);
}

namespace {

QuadratureRule compute_gauss_hermite(int n) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k + 1 < n; ++k) {
        const double beta = std::sqrt((k + 1) / 2.0);
        jacobi(k, k + 1) = beta;
        jacobi(k + 1, k) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double mu0 = std::sqrt(M_PI);  // integral of the weight e^{-u^2}
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = solver.eigenvalues()(i);
        const double v0 = solver.eigenvectors()(0, i);
        rule.weights[i] = mu0 * v0 * v0;
    }
    return rule;
}

}  // namespace

const QuadratureRule& gauss_hermite_rule(int n) {
    if (n < 1) throw OracleError("quadrature: need at least one node");
    static std::map<int, QuadratureRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gauss_hermite(n)).first;
    return it->second;
}

double gaussian_expectation(const std::function<double(double)>& h, double mean, double sd,
                            int quadrature_nodes) {
    const QuadratureRule& rule = gauss_hermite_rule(quadrature_nodes);
    const double root2 = std::sqrt(2.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * h(mean + root2 * sd * rule.nodes[i]);
    return acc / std::sqrt(M_PI);
}

double log_exp_value(const std::function<double(double)>& h, double mean, double sd,
                     int quadrature_nodes) {
    const QuadratureRule& rule = gauss_hermite_rule(quadrature_nodes);
    const double root2 = std::sqrt(2.0);
    const std::size_t n = rule.nodes.size();
    Vec exponents(n);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        exponents[i] = -h(mean + root2 * sd * rule.nodes[i]);
        peak = std::max(peak, exponents[i]);
    }
    if (!std::isfinite(peak)) throw OracleError("quadrature: payoff not finite on nodes");
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += rule.weights[i] * std::exp(exponents[i] - peak);
    const double value = -(peak + std::log(acc / std::sqrt(M_PI)));
    if (!std::isfinite(value)) throw OracleError("quadrature: integral overflow");
    return value;
}

double cole_hopf_aggregate(const economy::MarketModel& model_1d, double t, double x,
                           int quadrature_nodes) {
    if (model_1d.dim_d != 1) throw OracleError("aggregate oracle: requires d = 1");
    if (!model_1d.constant_coeffs)
        throw OracleError("aggregate oracle: requires constant coefficients");
    const economy::ScaledEconomy econ = economy::scale_economy(model_1d);

    const double b = model_1d.constant_coeffs->drift[0];
    const double sig = model_1d.constant_coeffs->sigma.at(0, 0);
    const double tau = 1.0 - t;
    const double mean = x + b * tau;
    const double sd = std::fabs(sig) * std::sqrt(tau);

    auto aggregate = [&](double y) {
        const double ybuf[1] = {y};
        const std::span<const double> ys(ybuf, 1);
        double g = econ.scaled_dividend(ys);
        for (std::size_t i = 0; i < econ.scaled_endowments.size(); ++i)
            g += econ.alphas[i] * econ.scaled_endowments[i](ys);
        return g;
    };
    if (tau == 0.0) return aggregate(x);
    return log_exp_value(aggregate, mean, sd, quadrature_nodes);
}

double nonhedgeable_r2(const std::function<double(double)>& payoff, double t, double x2,
                       int quadrature_nodes) {
    const double tau = 1.0 - t;
    if (tau == 0.0) return payoff(x2);
    return log_exp_value(payoff, x2, std::sqrt(tau), quadrature_nodes);
}

double tilted_expectation(const std::function<double(double)>& h,
                          const std::function<double(double)>& w, double mean, double sd,
                          int quadrature_nodes) {
    const QuadratureRule& rule = gauss_hermite_rule(quadrature_nodes);
    const double root2 = std::sqrt(2.0);
    const std::size_t n = rule.nodes.size();
    Vec exponents(n), values(n);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double y = mean + root2 * sd * rule.nodes[i];
        exponents[i] = -w(y);
        values[i] = h(y);
        peak = std::max(peak, exponents[i]);
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double weight = rule.weights[i] * std::exp(exponents[i] - peak);
        num += weight * values[i];
        den += weight;
    }
    if (!(den > 0.0)) throw OracleError("tilted expectation: degenerate weight");
    return num / den;
}

}  // namespace radner::closed_form
