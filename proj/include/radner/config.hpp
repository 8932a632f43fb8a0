// SPDX-License-Identifier: MIT
//
// Flat key-value experiment configuration. One `key = value` pair per line,
// `#` comments, values typed as bool, integer, real, quoted/bare string or
// [a, b, c] arrays of reals. Unknown keys are rejected with the line number.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "radner/economy.hpp"
#include "radner/linalg.hpp"

namespace radner::config {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class EconomyKind { Gaussian, PutOption, Tabulated };

struct ExperimentConfig {
    EconomyKind economy = EconomyKind::Gaussian;
    Vec deltas = {1.0 / 3.0, 0.5};

    // gaussian economy
    Vec b0 = {1.0, 0.0};
    std::vector<Vec> b_agents = {{0.5, 0.3}, {-0.2, 0.1}};

    // put-option economy
    int option_count = 2;
    std::vector<int> option_counts = {1, 2};  // experiment sweep
    double sigma_w = 0.2 / 1.4142135623730951;
    Vec delta1_sweep = {};  // extra option-holder risk tolerances (N fixed)
    double payoff_smoothing = 0.0;

    // tabulated economy
    Vec tab_lo, tab_hi;
    int tab_nodes = 0;
    Vec tab_dividend;
    std::vector<Vec> tab_endowments;

    // grid
    std::optional<Vec> box_lo, box_hi;  // default: x0 +- box_margin * diffusion scale
    double box_margin = 5.0;
    int n_x = 161;
    int n_t = 200;

    // regularization
    double reg_n = 50.0;
    Vec reg_ladder = {25.0, 50.0, 100.0};

    // refinement
    std::vector<int> refine_resolutions = {41, 81, 161};

    // validator
    int n_paths = 10000;
    int n_steps = 400;
    std::uint64_t seed = 20240801;
    bool strict = false;
    bool inject_corruption = false;
    double eps_nodal = 1e-8;
    double nodal_eps = 1e-6;
    int quadrature_nodes = 200;

    // sweep used by the put-option experiment (multiples of sigma_w)
    double sweep_halfwidth_sigmas = 3.0;
    int sweep_samples = 161;

    std::string out_dir = "out";
    bool write_report = true;
};

/// Parses the documented format; throws ConfigError naming the offending
/// key and line on any problem (unknown key, type mismatch, bad value).
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config_file(const std::string& path);

/// Builds the configured economy (validated).
economy::MarketModel build_economy(const ExperimentConfig& cfg);

}  // namespace radner::config
