// SPDX-License-Identifier: MIT
//
// Command line driver. Subcommands:
//   solve          solve the configured economy, write the t = 0 slice
//   put-option     put-option experiment, one CSV of figure data per case
//   gaussian-check solver vs closed form on the linear-payoff economy
//   validate       full validation suite, JSON report, exit 1 on failure
//   refine         spatial refinement study
//
// Exit codes: 0 success, 1 check failure, 2 usage or configuration error.
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "radner/csv.hpp"
#include "radner/equilibrium.hpp"
#include "radner/experiments.hpp"

namespace {

using radner::config::ExperimentConfig;
using nlohmann::ordered_json;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool strict = false;
};

ExperimentConfig load(const CommonArgs& args) {
    ExperimentConfig cfg = args.config_path.empty()
                               ? ExperimentConfig{}
                               : radner::config::load_config_file(args.config_path);
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.seed_set) cfg.seed = args.seed;
    if (args.strict) cfg.strict = true;
    return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config file");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "override the config seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_flag("--strict", args.strict, "escalate warnings to errors");
}

int cmd_solve(const ExperimentConfig& cfg) {
    namespace ec = radner::economy;
    const ec::MarketModel model = radner::config::build_economy(cfg);
    const auto grid = radner::experiments::grid_for(cfg, model);
    radner::pde::SolverOptions options;
    options.reg_n = cfg.reg_n;
    const auto field = radner::pde::solve(model, grid, options);
    const ec::ScaledEconomy econ = ec::scale_economy(model);
    const radner::equilibrium::EquilibriumField eq(field, econ, cfg.eps_nodal);

    std::filesystem::create_directories(cfg.out_dir);
    const auto slice = eq.slice(0);
    std::string header = grid.dim == 1 ? "x1" : "x1,x2";
    for (int c = 0; c < field.components; ++c) header += ",v" + std::to_string(c);
    header += ",premium_unscaled,totalvol_unscaled";
    for (int i = 0; i < slice.agents; ++i) header += ",theta" + std::to_string(i + 1);
    radner::csv::Writer writer(header);
    for (int node = 0; node < grid.num_nodes(); ++node) {
        radner::Vec row;
        double xbuf[2];
        std::span<double> x(xbuf, static_cast<std::size_t>(grid.dim));
        grid.node_coords(node, x);
        for (int a = 0; a < grid.dim; ++a) row.push_back(x[a]);
        for (int c = 0; c < field.components; ++c) row.push_back(field.value(0, node, c));
        row.push_back(slice.premium_unscaled[node]);
        row.push_back(slice.total_vol_unscaled[node]);
        for (int i = 0; i < slice.agents; ++i)
            row.push_back(slice.thetas[static_cast<std::size_t>(node) * slice.agents + i]);
        writer.add_row(row);
    }
    writer.write_file(cfg.out_dir + "/solution_t0.csv");

    ordered_json summary;
    summary["components"] = field.components;
    summary["nodes"] = grid.num_nodes();
    summary["time_steps"] = grid.time_steps;
    summary["reg_n"] = field.reg_n;
    summary["terminal_sup_norm"] = field.slice_sup_norms.back();
    summary["initial_sup_norm"] = field.slice_sup_norms.front();
    summary["clearing_max_violation"] = eq.max_clearing_violation();
    summary["nodal_fraction"] = radner::equilibrium::nodal_set_fraction(field, cfg.nodal_eps);
    std::ofstream js(cfg.out_dir + "/solution_summary.json", std::ios::binary);
    js << summary.dump(2) << "\n";
    std::cout << "wrote " << cfg.out_dir << "/solution_t0.csv\n";
    return 0;
}

int cmd_put_option(const ExperimentConfig& cfg) {
    const auto output = radner::experiments::run_put_option_experiment(cfg);
    radner::experiments::write_put_experiment(output, cfg.out_dir);
    for (const auto& run : output.runs)
        std::cout << "wrote " << cfg.out_dir << "/" << run.filename
                  << " (clearing violation " << run.clearing_violation << ")\n";
    return 0;
}

int cmd_gaussian_check(const ExperimentConfig& cfg) {
    const auto result = radner::experiments::run_gaussian_check(cfg);
    std::cout << (result.passed ? "PASS " : "FAIL ") << result.details << "\n";
    for (std::size_t i = 0; i < result.convergence.orders.size(); ++i)
        std::cout << "  refine " << result.convergence.resolutions[i] << "->"
                  << result.convergence.resolutions[i + 1]
                  << " order_v0=" << result.convergence.orders[i][0] << "\n";
    return result.passed ? 0 : 1;
}

int cmd_validate(const ExperimentConfig& cfg) {
    const auto suite = radner::experiments::run_validation_suite(cfg);
    for (const auto& check : suite.checks)
        std::cout << (check.passed ? "[PASS] " : "[FAIL] ") << check.name << ": " << check.details
                  << "\n";
    if (cfg.write_report) {
        std::filesystem::create_directories(cfg.out_dir);
        std::ofstream out(cfg.out_dir + "/validation_report.json", std::ios::binary);
        out << suite.to_json();
        std::cout << "wrote " << cfg.out_dir << "/validation_report.json\n";
    }
    return suite.all_passed() ? 0 : 1;
}

int cmd_refine(const ExperimentConfig& cfg) {
    const auto report = radner::experiments::run_refine(cfg);
    radner::csv::Writer writer("resolution,component,error,order");
    for (std::size_t g = 0; g < report.errors.size(); ++g)
        for (std::size_t c = 0; c < report.errors[g].size(); ++c) {
            const double order =
                g == 0 ? std::numeric_limits<double>::quiet_NaN() : report.orders[g - 1][c];
            writer.add_row({static_cast<double>(report.resolutions[g]), static_cast<double>(c),
                            report.errors[g][c], order});
        }
    std::filesystem::create_directories(cfg.out_dir);
    writer.write_file(cfg.out_dir + "/refine_study.csv");
    std::cout << "wrote " << cfg.out_dir << "/refine_study.csv\n";
    for (std::size_t g = 0; g < report.orders.size(); ++g)
        std::cout << "  " << report.resolutions[g] << "->" << report.resolutions[g + 1]
                  << " order_v0=" << report.orders[g][0] << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Incomplete-market equilibrium solver and validation lab"};
    app.require_subcommand(1);

    CommonArgs args;
    auto* solve_cmd = app.add_subcommand("solve", "solve the configured economy");
    auto* put_cmd = app.add_subcommand("put-option", "put-option figure data");
    auto* gauss_cmd = app.add_subcommand("gaussian-check", "solver vs closed form");
    auto* validate_cmd = app.add_subcommand("validate", "run the validation suite");
    auto* refine_cmd = app.add_subcommand("refine", "spatial refinement study");
    for (auto* cmd : {solve_cmd, put_cmd, gauss_cmd, validate_cmd, refine_cmd})
        add_common(cmd, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const ExperimentConfig cfg = load(args);
        if (solve_cmd->parsed()) return cmd_solve(cfg);
        if (put_cmd->parsed()) return cmd_put_option(cfg);
        if (gauss_cmd->parsed()) return cmd_gaussian_check(cfg);
        if (validate_cmd->parsed()) return cmd_validate(cfg);
        if (refine_cmd->parsed()) return cmd_refine(cfg);
    } catch (const radner::config::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
