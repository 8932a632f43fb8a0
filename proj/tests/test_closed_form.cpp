// SPDX-License-Identifier: MIT
#include <doctest.h>

#include <cmath>

#include "radner/closed_form.hpp"
#include "radner/generator.hpp"
#include "radner/rng.hpp"

using namespace radner;
using closed_form::GaussianSpec;

TEST_CASE("gauss-hermite rule") {
    const auto& rule = closed_form::gauss_hermite_rule(200);
    double total = 0.0, second = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        total += rule.weights[i];
        second += rule.weights[i] * rule.nodes[i] * rule.nodes[i];
    }
    CHECK(total == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-13));
    CHECK(second == doctest::Approx(0.5 * std::sqrt(M_PI)).epsilon(1e-12));

    // moment generating function of the standard normal
    const double c = 0.7;
    const double mgf = closed_form::gaussian_expectation(
        [c](double y) { return std::exp(c * y); }, 0.0, 1.0, 64);
    CHECK(mgf == doctest::Approx(std::exp(0.5 * c * c)).epsilon(1e-12));
}

TEST_CASE("linear-payoff solution values") {
    SUBCASE("offsetting endowments") {
        // sum_k alpha_k b_k = 0, so S(0, 0) = -|b0|^2
        GaussianSpec spec = GaussianSpec::from_economy({1.0, 0.0}, {{1.0, 0.0}, {-1.0, 0.0}},
                                                       {1.0, 1.0});
        const double x[2] = {0.0, 0.0};
        const auto sol = closed_form::gaussian_solution(spec, 0.0, x);
        CHECK(sol.stock == doctest::Approx(-1.0).epsilon(1e-14));
        CHECK(sol.thetas[0] == doctest::Approx(0.0));
        CHECK(sol.thetas[1] == doctest::Approx(2.0));
    }
    SUBCASE("terminal condition") {
        GaussianSpec spec = GaussianSpec::from_economy({1.0, 0.0}, {{0.5, 0.3}, {-0.2, 0.1}},
                                                       {1.0 / 3.0, 0.5});
        const double x[2] = {0.7, -1.2};
        const auto sol = closed_form::gaussian_solution(spec, 1.0, x);
        CHECK(sol.stock == doctest::Approx(0.7).epsilon(1e-14));
        CHECK(sol.agents[0] == doctest::Approx(0.5 * 0.7 + 0.3 * -1.2).epsilon(1e-13));
    }
    SUBCASE("orthogonal endowments hold the market portfolio") {
        GaussianSpec spec = GaussianSpec::from_economy({1.0, 0.0}, {{0.0, 0.4}, {0.0, -0.4}},
                                                       {1.0, 1.0});
        const double x[2] = {0.0, 0.0};
        const auto sol = closed_form::gaussian_solution(spec, 0.3, x);
        CHECK(sol.thetas[0] == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(sol.thetas[1] == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("positions clear exactly") {
        rng::Stream s(3, 0);
        for (int trial = 0; trial < 20; ++trial) {
            GaussianSpec spec = GaussianSpec::from_economy(
                {s.next_uniform(0.2, 2), s.next_uniform(-1, 1)},
                {{s.next_normal(), s.next_normal()}, {s.next_normal(), s.next_normal()}},
                {s.next_uniform(0.1, 2), s.next_uniform(0.1, 2)});
            const double x[2] = {s.next_normal(), s.next_normal()};
            const auto sol = closed_form::gaussian_solution(spec, s.next_uniform(), x);
            double clearing = 0.0;
            for (std::size_t i = 0; i < sol.thetas.size(); ++i)
                clearing += spec.alphas[i] * sol.thetas[i];
            CHECK(clearing == doctest::Approx(1.0).epsilon(1e-13));
        }
    }
    SUBCASE("degenerate dividend row rejected") {
        GaussianSpec spec;
        spec.b0 = {0.0, 0.0};
        spec.b_agents = {{1.0, 0.0}};
        spec.alphas = {1.0};
        spec.sum_delta = 1.0;
        CHECK_THROWS_AS(spec.validate(), closed_form::OracleError);
    }
}

TEST_CASE("linear-payoff solution satisfies the backward system pointwise") {
    // the time derivative of each component must cancel the driver at the
    // constant volatility matrix (the spatial operator vanishes on linear v)
    GaussianSpec spec = GaussianSpec::from_economy({1.0, 0.0}, {{0.5, 0.3}, {-0.2, 0.1}},
                                                   {1.0 / 3.0, 0.5});
    generator::ZMatrix z(2, 2);
    for (int j = 0; j < 2; ++j) z.row(0)[j] = spec.b0[j];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) z.row(i + 1)[j] = spec.b_agents[i][j];
    const Vec f = generator::eval_raw(z, spec.alphas);

    rng::Stream s(9, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const double t = s.next_uniform(0, 0.99);
        const double h = 1e-6;
        const double x[2] = {s.next_normal(), s.next_normal()};
        const auto up = closed_form::gaussian_solution(spec, t + h, x);
        const auto dn = closed_form::gaussian_solution(spec, t - h, x);
        const double dt_stock = (up.stock - dn.stock) / (2 * h);
        CHECK(std::fabs(dt_stock + f[0]) < 1e-8);
        for (int i = 0; i < 2; ++i) {
            const double dt_agent = (up.agents[i] - dn.agents[i]) / (2 * h);
            CHECK(std::fabs(dt_agent + f[i + 1]) < 1e-8);
        }
    }
}

TEST_CASE("unscaled premium") {
    SUBCASE("zero net endowment") {
        // scaled rows chosen so the unscaled dividend variance is 0.04
        const double sum_delta = 5.0 / 6.0;
        const double sw = 0.2 / std::sqrt(2.0);
        const Vec b0 = {sw / sum_delta, sw / sum_delta};
        // delta_1 b_1 + delta_2 b_2 = 0
        const std::vector<Vec> agents = {{0.3, 0.0}, {-0.2, 0.0}};
        GaussianSpec spec = GaussianSpec::from_economy(b0, agents, {1.0 / 3.0, 0.5});
        const auto premium = closed_form::gaussian_premium_unscaled(spec);
        CHECK(premium.variance == doctest::Approx(0.04).epsilon(1e-12));
        CHECK(premium.premium == doctest::Approx(0.048).epsilon(1e-12));
    }
    SUBCASE("endowments replicating the dividend double the premium") {
        GaussianSpec spec = GaussianSpec::from_economy({0.5, 0.1}, {{0.5, 0.1}}, {2.0});
        const auto premium = closed_form::gaussian_premium_unscaled(spec);
        CHECK(premium.premium ==
              doctest::Approx(2.0 * premium.variance / spec.sum_delta).epsilon(1e-13));
    }
}

TEST_CASE("complete-market benchmark") {
    const double sum_delta = 5.0 / 6.0;
    const Vec xi = {0.1, 0.1};

    SUBCASE("terminal value is the scaled dividend") {
        const Vec g = {0.3, -0.2};
        const double w[2] = {1.4, -0.6};
        CHECK(closed_form::complete_benchmark_gaussian(g, xi, sum_delta, 1.0, w) ==
              doctest::Approx(dot(xi, std::span<const double>(w, 2)) / sum_delta)
                  .epsilon(1e-14));
    }
    SUBCASE("orthogonal tilt leaves the conditional mean") {
        const Vec g = {0.1, -0.1};  // orthogonal to xi
        const double w[2] = {0.5, 0.25};
        for (double t : {0.0, 0.5}) {
            CHECK(closed_form::complete_benchmark_gaussian(g, xi, sum_delta, t, w) ==
                  doctest::Approx(dot(xi, std::span<const double>(w, 2)) / sum_delta)
                      .epsilon(1e-14));
        }
    }
    SUBCASE("drift equals the premium formula and a Monte Carlo estimate") {
        const double sw = 0.2 / std::sqrt(2.0);
        const Vec rows = {sw, sw};
        const double w0[2] = {0.0, 0.0};
        const double s_at_0 =
            closed_form::complete_benchmark_gaussian(rows, rows, sum_delta, 0.0, w0);
        const double s_at_1 =
            closed_form::complete_benchmark_gaussian(rows, rows, sum_delta, 1.0, w0);
        const double premium = sum_delta * (s_at_1 - s_at_0);
        CHECK(premium == doctest::Approx(0.048).epsilon(1e-13));

        // Monte Carlo oracle for the tilted expectation at t = 0
        const int n = 1000000;
        double num = 0.0, den = 0.0, num_sq = 0.0, den_sq = 0.0, cross = 0.0;
        for (int i = 0; i < n; ++i) {
            const double w1 = rng::normal(12345, 0, i, 0);
            const double w2 = rng::normal(12345, 0, i, 1);
            const double xi_draw = sw * (w1 + w2);
            const double weight = std::exp(-xi_draw / sum_delta);
            num += weight * xi_draw;
            den += weight;
            num_sq += weight * xi_draw * weight * xi_draw;
            den_sq += weight * weight;
            cross += weight * xi_draw * weight;
        }
        num /= n; den /= n; num_sq /= n; den_sq /= n; cross /= n;
        const double mc = num / den;  // unscaled complete price at t = 0
        // delta-method standard error of the ratio estimator
        const double var_ratio =
            (num_sq - num * num - 2 * mc * (cross - num * den) + mc * mc * (den_sq - den * den)) /
            (den * den * n);
        const double se = std::sqrt(std::max(var_ratio, 0.0));
        const double closed = sum_delta * s_at_0;
        CHECK(std::fabs(mc - closed) < 3.0 * se + 1e-12);
    }
}

TEST_CASE("aggregate log transform in one dimension") {
    RowMat sigma(1, 1);
    sigma.at(0, 0) = 1.0;

    SUBCASE("linear aggregate has the gaussian closed form") {
        // single agent, zero endowment: G(y) = c y
        const double c = 0.8;
        economy::MarketModel m;
        m.dim_d = 1;
        m.num_agents = 1;
        m.deltas = {1.0};
        m.x0 = {0.0};
        m.drift = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
        m.vol = [](double, std::span<const double>, std::span<double> out) { out[0] = 1.0; };
        m.constant_coeffs = economy::ConstantCoefficients{{0.0}, sigma};
        m.dividend = [c](std::span<const double> x) { return c * x[0]; };
        m.endowments.push_back([](std::span<const double>) { return 0.0; });

        const double t = 0.3, x = 0.4;
        const double value = closed_form::cole_hopf_aggregate(m, t, x, 200);
        CHECK(value == doctest::Approx(c * x - c * c * (1.0 - t) / 2.0).epsilon(1e-10));

        SUBCASE("constant aggregate is returned unchanged") {
            m.dividend = [](std::span<const double>) { return 0.7; };
            CHECK(closed_form::cole_hopf_aggregate(m, 0.2, 1.3, 200) ==
                  doctest::Approx(0.7).epsilon(1e-12));
        }
        SUBCASE("non-constant coefficients are rejected") {
            m.constant_coeffs.reset();
            CHECK_THROWS_AS(closed_form::cole_hopf_aggregate(m, 0.2, 0.0, 200),
                            closed_form::OracleError);
        }
    }
    SUBCASE("quadratic aggregate against Monte Carlo") {
        economy::MarketModel m;
        m.dim_d = 1;
        m.num_agents = 1;
        m.deltas = {1.0};
        m.x0 = {0.0};
        m.drift = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
        m.vol = [](double, std::span<const double>, std::span<double> out) { out[0] = 1.0; };
        m.constant_coeffs = economy::ConstantCoefficients{{0.0}, sigma};
        m.dividend = [](std::span<const double> x) { return 0.3 * x[0] * x[0] + 0.2 * x[0]; };
        m.endowments.push_back([](std::span<const double>) { return 0.0; });

        const double t = 0.25, x = -0.3;
        const double value = closed_form::cole_hopf_aggregate(m, t, x, 300);

        const int n = 1000000;
        const double sd = std::sqrt(1.0 - t);
        double acc = 0.0, acc_sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double y = x + sd * rng::normal(777, 0, i, 0);
            const double w = std::exp(-(0.3 * y * y + 0.2 * y));
            acc += w;
            acc_sq += w * w;
        }
        acc /= n;
        acc_sq /= n;
        const double mc_value = -std::log(acc);
        const double se_mean = std::sqrt((acc_sq - acc * acc) / n);
        const double se_log = se_mean / acc;
        CHECK(std::fabs(value - mc_value) < 3.0 * se_log + 1e-12);
    }
}

TEST_CASE("non-hedgeable certainty equivalent") {
    SUBCASE("linear payoff") {
        const double c = 0.6, t = 0.4, x2 = -0.2;
        CHECK(closed_form::nonhedgeable_r2([c](double w) { return c * w; }, t, x2, 200) ==
              doctest::Approx(c * x2 - c * c * (1.0 - t) / 2.0).epsilon(1e-10));
    }
    SUBCASE("zero payoff") {
        CHECK(closed_form::nonhedgeable_r2([](double) { return 0.0; }, 0.2, 0.9, 100) ==
              doctest::Approx(0.0));
    }
    SUBCASE("terminal time returns the payoff") {
        CHECK(closed_form::nonhedgeable_r2([](double w) { return w * w; }, 1.0, 0.7, 100) ==
              doctest::Approx(0.49));
    }
}

TEST_CASE("quadrature agrees with Monte Carlo on randomized smooth payoffs") {
    rng::Stream s(51, 0);
    for (int trial = 0; trial < 10; ++trial) {
        const double a = s.next_uniform(-0.5, 0.5);
        const double b = s.next_uniform(-0.5, 0.5);
        const double c = s.next_uniform(0.3, 2.0);
        const double q = s.next_uniform(0.0, 0.3);
        auto payoff = [=](double y) { return a * y + b * std::tanh(c * y) + q * y * y; };
        const double t = s.next_uniform(0.0, 0.9);
        const double x = s.next_uniform(-1.0, 1.0);
        const double quad = closed_form::nonhedgeable_r2(payoff, t, x, 200);

        const int n = 1000000;
        const double sd = std::sqrt(1.0 - t);
        double acc = 0.0, acc_sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double y = x + sd * rng::normal(9000 + trial, 0, i, 0);
            const double w = std::exp(-payoff(y));
            acc += w;
            acc_sq += w * w;
        }
        acc /= n;
        acc_sq /= n;
        const double mc = -std::log(acc);
        const double se = std::sqrt(std::max(acc_sq - acc * acc, 0.0) / n) / acc;
        CAPTURE(trial);
        CHECK(std::fabs(quad - mc) < 3.0 * se + 1e-10);
    }
}
