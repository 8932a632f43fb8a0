// SPDX-License-Identifier: MIT
#include <doctest.h>

#include <cmath>

#include "radner/config.hpp"
#include "radner/csv.hpp"
#include "radner/economy.hpp"

using namespace radner;
using config::parse_config;

TEST_CASE("minimal config gets documented defaults") {
    const auto cfg = parse_config("economy = gaussian\n");
    CHECK(cfg.n_x == 161);
    CHECK(cfg.n_t == 200);
    CHECK(cfg.reg_n == 50.0);
    CHECK(cfg.n_paths == 10000);
    CHECK(cfg.economy == config::EconomyKind::Gaussian);
}

TEST_CASE("put option config scales to the documented weights") {
    const auto cfg = parse_config(
        "economy = put_option\n"
        "deltas = [0.3333333, 0.5]\n"
        "option_count = 2\n");
    const auto econ = economy::scale_economy(config::build_economy(cfg));
    CHECK(econ.alphas[0] == doctest::Approx(0.4).epsilon(1e-6));
    CHECK(econ.alphas[1] == doctest::Approx(0.6).epsilon(1e-6));
}

TEST_CASE("config errors name the offending key") {
    SUBCASE("value out of range") {
        try {
            parse_config("n_x = 2\n");
            FAIL("expected a config error");
        } catch (const config::ConfigError& e) {
            CHECK(std::string(e.what()).find("n_x") != std::string::npos);
        }
    }
    SUBCASE("unknown key") {
        try {
            parse_config("economy = gaussian\nnx = 5\n");
            FAIL("expected a config error");
        } catch (const config::ConfigError& e) {
            CHECK(std::string(e.what()).find("nx") != std::string::npos);
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SUBCASE("type mismatch") {
        CHECK_THROWS_AS(parse_config("n_x = many\n"), config::ConfigError);
        CHECK_THROWS_AS(parse_config("strict = yes\n"), config::ConfigError);
        CHECK_THROWS_AS(parse_config("deltas = 0.5\n"), config::ConfigError);
    }
    SUBCASE("duplicate key") {
        CHECK_THROWS_AS(parse_config("n_x = 41\nn_x = 81\n"), config::ConfigError);
    }
    SUBCASE("missing separator") {
        CHECK_THROWS_AS(parse_config("n_x 41\n"), config::ConfigError);
    }
    SUBCASE("agent rows must match deltas") {
        CHECK_THROWS_AS(parse_config("economy = gaussian\n"
                                     "deltas = [1.0]\n"
                                     "b0 = [1, 0]\n"
                                     "b1 = [0.5, 0]\n"
                                     "b2 = [0.5, 0]\n"),
                        config::ConfigError);
    }
}

TEST_CASE("values, arrays, comments and strings parse") {
    const auto cfg = parse_config(
        "# a comment line\n"
        "economy = gaussian\n"
        "deltas = [0.25, 0.75]   # trailing comment\n"
        "b0 = [1.0, 0.5]\n"
        "b1 = [0.1, 0.2]\n"
        "b2 = [-0.1, 0.3]\n"
        "seed = 42\n"
        "strict = true\n"
        "out_dir = \"runs/exp1\"\n");
    CHECK(cfg.deltas[1] == 0.75);
    CHECK(cfg.b_agents.size() == 2);
    CHECK(cfg.b_agents[1][1] == 0.3);
    CHECK(cfg.seed == 42);
    CHECK(cfg.strict);
    CHECK(cfg.out_dir == "runs/exp1");
}

TEST_CASE("tabulated economy from config") {
    const auto cfg = parse_config(
        "economy = tabulated\n"
        "deltas = [1.0]\n"
        "tab_lo = [-1.0]\n"
        "tab_hi = [1.0]\n"
        "tab_nodes = 3\n"
        "tab_dividend = [-2.0, 0.0, 2.0]\n"  // 2x
        "tab_endow1 = [1.0, 0.0, 1.0]\n");   // |x|
    const auto model = config::build_economy(cfg);
    const double x[1] = {0.5};
    CHECK(model.dividend(std::span<const double>(x, 1)) == doctest::Approx(1.0));
    CHECK(model.endowments[0](std::span<const double>(x, 1)) == doctest::Approx(0.5));
}

TEST_CASE("csv doubles round-trip") {
    for (double v : {0.1, 1.0 / 3.0, -0.0, 1e-300, 123456789.123456789, 2e300}) {
        const std::string text = csv::format_double(v);
        CHECK(std::stod(text) == v);
    }
    csv::Writer w("a,b");
    w.add_row({1.5, -2.0});
    CHECK(w.text() == "a,b\n1.5,-2\n");
}
