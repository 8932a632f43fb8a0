// SPDX-License-Identifier: MIT
//
// Experiment orchestration shared by the command line tool and the test
// suites: the put-option figure data, the Gaussian-oracle comparison, the
// refinement study and the validation suite.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "radner/config.hpp"
#include "radner/mc_validator.hpp"
#include "radner/pde_solver.hpp"

namespace radner::experiments {

pde::Grid grid_for(const config::ExperimentConfig& cfg, const economy::MarketModel& model);

// ---------------------------------------------------------------------------
// Put-option experiment: equilibrium quantities at t = 0 along the x2 axis
// through x1 = x0[0], against the complete-market benchmark.
// ---------------------------------------------------------------------------

struct PutRun {
    std::string filename;
    int option_count = 0;
    double delta1 = 0.0;
    std::vector<std::string> columns;
    std::vector<Vec> rows;   // one entry per sweep point, column order as above
    std::string csv_text;
    double clearing_violation = 0.0;  // max over the solved field
};

struct PutExperimentOutput {
    std::vector<PutRun> runs;
};

PutExperimentOutput run_put_option_experiment(const config::ExperimentConfig& cfg);

/// Writes every run's CSV under cfg.out_dir (created if missing).
void write_put_experiment(const PutExperimentOutput& output, const std::string& out_dir);

// ---------------------------------------------------------------------------
// Gaussian-oracle comparison
// ---------------------------------------------------------------------------

struct GaussianCheckResult {
    double max_value_error = 0.0;  // sup over inner half of the box, all slices
    double max_zeta_error = 0.0;   // componentwise against b0
    double clearing_violation = 0.0;
    double nodal_fraction = 0.0;
    pde::ConvergenceReport convergence;
    bool passed = false;
    std::string details;
};

GaussianCheckResult run_gaussian_check(const config::ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Validation suite
// ---------------------------------------------------------------------------

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string details;
};

struct SuiteResult {
    std::vector<CheckResult> checks;
    mc::ValidationReport report;

    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
    std::string to_json() const;
};

SuiteResult run_validation_suite(const config::ExperimentConfig& cfg);

pde::ConvergenceReport run_refine(const config::ExperimentConfig& cfg);

/// Interpolated value of a per-node quantity at x (multilinear).
double interp_nodal(const pde::Grid& grid, const Vec& per_node, std::span<const double> x);

}  // namespace radner::experiments
