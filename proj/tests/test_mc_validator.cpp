// SPDX-License-Identifier: MIT
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "radner/mc_validator.hpp"

using namespace radner;

namespace {

struct GaussianSetup {
    economy::MarketModel model;
    economy::ScaledEconomy econ;
    closed_form::GaussianSpec spec;
};

GaussianSetup gaussian_setup() {
    const Vec b0 = {1.0, 0.0};
    const std::vector<Vec> agents = {{0.5, 0.3}, {-0.2, 0.1}};
    const Vec deltas = {1.0 / 3.0, 0.5};
    GaussianSetup s{economy::make_gaussian_economy(b0, agents, deltas), {}, {}};
    s.econ = economy::scale_economy(s.model);
    s.spec = closed_form::GaussianSpec::from_economy(b0, agents, deltas);
    return s;
}

}  // namespace

TEST_CASE("euler paths are unbiased and deterministic") {
    auto setup = gaussian_setup();
    mc::GaussianFieldSampler sampler(setup.spec);
    mc::SimulateOptions options;
    options.n_paths = 40000;
    options.n_steps = 1;
    options.seed = 31337;

    const auto batch = mc::simulate(setup.model, sampler, options);
    double mean0 = 0.0;
    for (int p = 0; p < batch.n_paths; ++p) mean0 += batch.x_at(p, 1)[0];
    mean0 /= batch.n_paths;
    CHECK(std::fabs(mean0 - setup.model.x0[0]) < 4.0 / std::sqrt(40000.0));

    const auto again = mc::simulate(setup.model, sampler, options);
    CHECK(std::memcmp(batch.x.data(), again.x.data(), batch.x.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(batch.dw.data(), again.dw.data(), batch.dw.size() * sizeof(double)) == 0);
}

TEST_CASE("zero economy has an exactly zero residual") {
    economy::MarketModel m;
    m.dim_d = 1;
    m.num_agents = 1;
    m.deltas = {1.0};
    m.x0 = {0.0};
    m.drift = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    m.vol = [](double, std::span<const double>, std::span<double> out) { out[0] = 1.0; };
    m.dividend = [](std::span<const double>) { return 0.0; };
    m.endowments.push_back([](std::span<const double>) { return 0.0; });

    const pde::Grid grid = pde::build_grid({-5.0}, {5.0}, 11, 10);
    const auto field = pde::solve(m, grid, {});
    const auto econ = economy::scale_economy(m);
    mc::GridFieldSampler sampler(field, econ);
    mc::SimulateOptions options;
    options.n_paths = 200;
    options.n_steps = 50;
    options.seed = 5;
    options.box_lo = grid.lo;
    options.box_hi = grid.hi;
    const auto batch = mc::simulate(m, sampler, options);
    const auto stats = mc::bsde_residual(batch, econ, 50.0);
    for (double v : stats.mean_abs) CHECK(v == 0.0);
}

TEST_CASE("closed-form linear-payoff field validates") {
    auto setup = gaussian_setup();
    mc::GaussianFieldSampler sampler(setup.spec);
    mc::SimulateOptions options;
    options.n_paths = 2000;
    options.n_steps = 100;
    options.seed = 99991;

    const auto batch = mc::simulate(setup.model, sampler, options);
    const auto stats = mc::bsde_residual(batch, setup.econ, 50.0);
    CHECK(stats.worst_mean_abs_over_scale < 1e-10);  // constant Z: telescoping is exact
    CHECK(stats.worst_signed_zscore < 5.0);

    const auto checks = mc::martingale_checks(batch, setup.econ.alphas);
    CHECK(checks.size() == 4);
    for (const auto& c : checks) {
        CAPTURE(c.name);
        CHECK(std::fabs(c.z_score) < 4.0);
        CHECK(c.excluded_paths == 0);
    }
}

TEST_CASE("corrupted fields are detected") {
    auto setup = gaussian_setup();
    const pde::Grid grid = pde::build_grid({-6.0, -6.0}, {6.0, 6.0}, 61, 50);
    const auto field = pde::solve(setup.model, grid, {});

    SUBCASE("price level shift shows up in the residual mean") {
        auto corrupted = field;
        for (auto& slice : corrupted.slices)
            for (std::size_t i = 0; i < slice.size(); i += corrupted.components) slice[i] += 0.1;
        mc::GridFieldSampler sampler(corrupted, setup.econ);
        mc::SimulateOptions options;
        options.n_paths = 4000;
        options.n_steps = 100;
        options.seed = 4242;
        options.box_lo = grid.lo;
        options.box_hi = grid.hi;
        const auto batch = mc::simulate(setup.model, sampler, options);
        const auto stats = mc::bsde_residual(batch, setup.econ, 50.0);
        CHECK(std::fabs(stats.mean_signed[0]) > 10.0 * stats.std_error[0]);
        CHECK(stats.mean_abs[0] == doctest::Approx(0.1).epsilon(0.05));
    }
    SUBCASE("spurious price drift breaks the deflated gains test") {
        // shift v_0 by 0.5 (1 - t): volatility rows and positions are
        // untouched, but the deflated gains acquire a clear drift
        auto corrupted = field;
        for (std::size_t k = 0; k < corrupted.slices.size(); ++k) {
            const double bump = 0.5 * (1.0 - grid.time_at(static_cast<int>(k)));
            for (int node = 0; node < grid.num_nodes(); ++node)
                corrupted.slices[k][static_cast<std::size_t>(node) * corrupted.components] +=
                    bump;
        }
        mc::GridFieldSampler sampler(corrupted, setup.econ);
        mc::SimulateOptions options;
        options.n_paths = 8000;
        options.n_steps = 100;
        options.seed = 1717;
        options.box_lo = grid.lo;
        options.box_hi = grid.hi;
        const auto batch = mc::simulate(setup.model, sampler, options);
        const auto checks = mc::martingale_checks(batch, setup.econ.alphas);
        double worst = 0.0;
        for (const auto& c : checks) worst = std::max(worst, std::fabs(c.z_score));
        CHECK(worst > 10.0);
    }
}

TEST_CASE("grid-field residual decays with the step count") {
    // nonlinear one-dimensional economy: the driver varies along paths, so
    // the residual carries a genuine first-order discretization part
    economy::MarketModel m;
    m.dim_d = 1;
    m.num_agents = 1;
    m.deltas = {1.0};
    m.x0 = {0.0};
    m.drift = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    m.vol = [](double, std::span<const double>, std::span<double> out) { out[0] = 1.0; };
    RowMat sigma(1, 1);
    sigma.at(0, 0) = 1.0;
    m.constant_coeffs = economy::ConstantCoefficients{{0.0}, sigma};
    m.dividend = [](std::span<const double> x) { return x[0] + 0.4 * std::tanh(2.0 * x[0]); };
    m.endowments.push_back([](std::span<const double> x) { return 0.5 * std::tanh(x[0]); });

    const pde::Grid grid = pde::build_grid({-6.0}, {6.0}, 481, 400);
    const auto field = pde::solve(m, grid, {});
    const auto econ = economy::scale_economy(m);

    auto mean_abs = [&](int n_steps) {
        mc::GridFieldSampler sampler(field, econ);
        mc::SimulateOptions options;
        options.n_paths = 2000;
        options.n_steps = n_steps;
        options.seed = 777;
        options.box_lo = grid.lo;
        options.box_hi = grid.hi;
        const auto batch = mc::simulate(m, sampler, options);
        const auto stats = mc::bsde_residual(batch, econ, 50.0);
        double worst = 0.0;
        for (double v : stats.mean_abs) worst = std::max(worst, v);
        return worst;
    };
    const double coarse = mean_abs(200);
    const double fine = mean_abs(800);
    CHECK(fine <= 0.6 * coarse + 1e-10);
}

TEST_CASE("brownian increments have the right per-step variance") {
    auto setup = gaussian_setup();
    mc::GaussianFieldSampler sampler(setup.spec);
    mc::SimulateOptions options;
    options.n_paths = 2000;
    options.n_steps = 25;
    options.seed = 515;
    const auto batch = mc::simulate(setup.model, sampler, options);
    const double dt = batch.dt();
    double sum_sq = 0.0;
    const std::size_t count = batch.dw.size();
    for (double v : batch.dw) sum_sq += v * v;
    const double sample_var = sum_sq / count;
    // chi-square concentration: sd of the variance estimate is dt sqrt(2/n)
    CHECK(std::fabs(sample_var - dt) < 5.0 * dt * std::sqrt(2.0 / count));
    for (int p = 0; p < batch.n_paths; ++p)
        for (int j = 0; j < batch.dim; ++j) CHECK(batch.x_at(p, 0)[j] == setup.model.x0[j]);
}

TEST_CASE("paths leaving the box are absorbed and counted") {
    auto setup = gaussian_setup();
    mc::GaussianFieldSampler sampler(setup.spec);
    mc::SimulateOptions options;
    options.n_paths = 500;
    options.n_steps = 60;
    options.seed = 2718;
    options.box_lo = Vec{-0.5, -0.5};  // tiny box: most paths exit
    options.box_hi = Vec{0.5, 0.5};

    const auto batch = mc::simulate(setup.model, sampler, options);
    CHECK(batch.exit_count > 0);
    for (int p = 0; p < batch.n_paths; ++p) {
        if (batch.exit_step[p] < 0) continue;
        // frozen after exit: increments vanish
        for (int k = batch.exit_step[p]; k < batch.n_steps; ++k)
            for (int j = 0; j < batch.dim; ++j) CHECK(batch.dw_at(p, k)[j] == 0.0);
    }

    options.strict = true;
    CHECK_THROWS(mc::simulate(setup.model, sampler, options));
}
