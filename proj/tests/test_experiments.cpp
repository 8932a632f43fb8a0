// SPDX-License-Identifier: MIT
#include <doctest.h>

#include <cmath>

#include "radner/experiments.hpp"

using namespace radner;

namespace {

config::ExperimentConfig small_put_config() {
    config::ExperimentConfig cfg;
    cfg.economy = config::EconomyKind::PutOption;
    cfg.deltas = {1.0 / 3.0, 0.5};
    cfg.sigma_w = 0.2 / std::sqrt(2.0);
    cfg.option_count = 2;
    cfg.option_counts = {2};
    cfg.n_x = 81;
    cfg.n_t = 100;
    cfg.sweep_samples = 81;
    return cfg;
}

}  // namespace

TEST_CASE("put experiment output schema and sanity") {
    const auto cfg = small_put_config();
    const auto output = experiments::run_put_option_experiment(cfg);
    REQUIRE(output.runs.size() == 1);
    const auto& run = output.runs.front();
    CHECK(run.filename == "put_option_N2.csv");
    CHECK(run.columns ==
          std::vector<std::string>{"x2", "premium_incomplete", "premium_complete",
                                   "totalvol_incomplete", "totalvol_complete", "theta1_unscaled",
                                   "theta2_unscaled"});
    CHECK(run.rows.size() == 81);
    CHECK(run.csv_text.substr(0, 3) == "x2,");
    CHECK(run.csv_text.find("\r") == std::string::npos);  // LF line ends only
    CHECK(run.clearing_violation <= 1e-10);

    SUBCASE("hedging demand decays as the option moves out of the money") {
        // non-increasing in x2 up to grid tolerance
        for (std::size_t r = 1; r < run.rows.size(); ++r)
            CHECK(run.rows[r][5] <= run.rows[r - 1][5] + 0.02);
    }
    SUBCASE("unscaled positions clear row by row") {
        for (const Vec& row : run.rows)
            CHECK(row[5] + row[6] == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("emitted bytes are reproducible") {
        const auto again = experiments::run_put_option_experiment(cfg);
        CHECK(again.runs.front().csv_text == run.csv_text);
    }
}

TEST_CASE("put experiment sweeps option count and risk tolerance") {
    auto cfg = small_put_config();
    cfg.option_counts = {1, 2};
    cfg.delta1_sweep = {1.0 / 3.0, 0.5};  // first entry duplicates the base case
    const auto output = experiments::run_put_option_experiment(cfg);
    REQUIRE(output.runs.size() == 3);
    CHECK(output.runs[0].filename == "put_option_N1.csv");
    CHECK(output.runs[1].filename == "put_option_N2.csv");
    CHECK(output.runs[2].filename == "put_option_N2_d1_0.5.csv");
    // a more risk-tolerant option holder hedges the same notional
    CHECK(output.runs[2].delta1 == 0.5);
}

TEST_CASE("validation suite passes on a small linear-payoff config") {
    config::ExperimentConfig cfg;
    cfg.n_x = 41;
    cfg.n_t = 50;
    cfg.n_paths = 1000;
    cfg.n_steps = 100;
    cfg.reg_ladder = {25.0, 50.0};
    const auto suite = experiments::run_validation_suite(cfg);
    for (const auto& check : suite.checks) {
        CAPTURE(check.name);
        CAPTURE(check.details);
        CHECK(check.passed);
    }
    CHECK(suite.all_passed());
    const std::string json = suite.to_json();
    CHECK(json.find("\"all_passed\": true") != std::string::npos);
    CHECK(json.find("bsde_residual") != std::string::npos);
}

TEST_CASE("corruption injection is caught and named") {
    config::ExperimentConfig cfg;
    cfg.n_x = 41;
    cfg.n_t = 50;
    cfg.n_paths = 1000;
    cfg.n_steps = 100;
    cfg.reg_ladder = {};
    cfg.inject_corruption = true;
    const auto suite = experiments::run_validation_suite(cfg);
    CHECK_FALSE(suite.all_passed());
    bool residual_failed = false;
    for (const auto& check : suite.checks)
        if (check.name == "bsde_residual" && !check.passed) residual_failed = true;
    CHECK(residual_failed);
}
