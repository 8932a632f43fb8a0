// SPDX-License-Identifier: MIT
#include "radner/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "radner/closed_form.hpp"
#include "radner/csv.hpp"
#include "radner/equilibrium.hpp"

namespace radner::experiments {

using nlohmann::ordered_json;

pde::Grid grid_for(const config::ExperimentConfig& cfg, const economy::MarketModel& model) {
    Vec lo, hi;
    if (cfg.box_lo) {
        lo = *cfg.box_lo;
        hi = *cfg.box_hi;
    } else {
        pde::default_box(model, cfg.box_margin, lo, hi);
    }
    return pde::build_grid(lo, hi, cfg.n_x, cfg.n_t, model.x0);
}

double interp_nodal(const pde::Grid& grid, const Vec& per_node, std::span<const double> x) {
    const pde::CellWeights cw = pde::locate_cell(grid, x);
    double acc = 0.0;
    for (int q = 0; q < cw.count; ++q) acc += cw.weights[q] * per_node[cw.corners[q]];
    return acc;
}

namespace {

std::string format_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

// Complete-market columns for a Gaussian aggregate: the benchmark price is
// evaluated in Brownian coordinates, its drift and volatility by differencing.
struct CompleteBenchmark {
    Vec g_vec, xi_vec;  // unscaled coefficient rows on W_1
    double sum_delta = 0.0;

    double premium(std::span<const double> w) const {
        const double s1 = closed_form::complete_benchmark_gaussian(g_vec, xi_vec, sum_delta, 1.0, w);
        const double s0 = closed_form::complete_benchmark_gaussian(g_vec, xi_vec, sum_delta, 0.0, w);
        return sum_delta * (s1 - s0);
    }
    double total_vol(std::span<const double> w) const {
        const double h = 1e-5;
        Vec wp(w.begin(), w.end()), wm(w.begin(), w.end());
        double acc = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) {
            wp[j] += h;
            wm[j] -= h;
            const double dj =
                (closed_form::complete_benchmark_gaussian(g_vec, xi_vec, sum_delta, 0.0, wp) -
                 closed_form::complete_benchmark_gaussian(g_vec, xi_vec, sum_delta, 0.0, wm)) /
                (2.0 * h);
            acc += dj * dj;
            wp[j] = w[j];
            wm[j] = w[j];
        }
        return sum_delta * std::sqrt(acc);
    }
};

}  // namespace

PutExperimentOutput run_put_option_experiment(const config::ExperimentConfig& cfg) {
    if (cfg.economy != config::EconomyKind::PutOption)
        throw config::ConfigError("put-option experiment: config economy must be put_option");

    struct Case {
        int n;
        double delta1;
        bool from_sweep;
    };
    std::vector<Case> cases;
    for (int n : cfg.option_counts) cases.push_back({n, cfg.deltas[0], false});
    for (double d1 : cfg.delta1_sweep) {
        if (std::fabs(d1 - cfg.deltas[0]) < 1e-15) continue;  // already covered
        cases.push_back({cfg.option_count, d1, true});
    }

    PutExperimentOutput output;
    for (const Case& c : cases) {
        Vec deltas = {c.delta1, cfg.deltas[1]};
        const economy::MarketModel model =
            economy::make_put_option_economy(c.n, cfg.sigma_w, deltas, cfg.payoff_smoothing);
        const pde::Grid grid = grid_for(cfg, model);
        pde::SolverOptions options;
        options.reg_n = cfg.reg_n;
        const pde::SolutionField field = pde::solve(model, grid, options);
        const economy::ScaledEconomy econ = economy::scale_economy(model);
        const equilibrium::EquilibriumField eq(field, econ, cfg.eps_nodal);
        const equilibrium::EquilibriumSlice slice0 = eq.slice(0);

        // Per-node columns for interpolation along the sweep.
        const int nodes = slice0.nodes;
        Vec theta1(nodes), theta2(nodes);
        for (int node = 0; node < nodes; ++node) {
            theta1[node] = slice0.thetas[static_cast<std::size_t>(node) * 2 + 0];
            theta2[node] = slice0.thetas[static_cast<std::size_t>(node) * 2 + 1];
        }

        // Aggregate endowment nets to zero, so the representative agent's
        // Gaussian endowment row equals the dividend row (on W coordinates).
        CompleteBenchmark complete;
        complete.sum_delta = econ.sum_delta;
        complete.xi_vec = {cfg.sigma_w, cfg.sigma_w};
        complete.g_vec = complete.xi_vec;

        PutRun run;
        run.option_count = c.n;
        run.delta1 = c.delta1;
        run.columns = {"x2",
                       "premium_incomplete",
                       "premium_complete",
                       "totalvol_incomplete",
                       "totalvol_complete",
                       "theta1_unscaled",
                       "theta2_unscaled"};
        run.filename = "put_option_N" + std::to_string(c.n) +
                       (c.from_sweep ? "_d1_" + format_g(c.delta1) : "") + ".csv";

        const double halfwidth = cfg.sweep_halfwidth_sigmas * cfg.sigma_w;
        const double x1 = model.x0[0];
        csv::Writer writer("x2,premium_incomplete,premium_complete,totalvol_incomplete,"
                           "totalvol_complete,theta1_unscaled,theta2_unscaled");
        for (int s = 0; s < cfg.sweep_samples; ++s) {
            const double x2 = model.x0[1] - halfwidth +
                              (2.0 * halfwidth * s) / (cfg.sweep_samples - 1);
            const double xbuf[2] = {x1, x2};
            const std::span<const double> x(xbuf, 2);
            const double wbuf[2] = {x1 / cfg.sigma_w, x2 / cfg.sigma_w};
            const std::span<const double> w(wbuf, 2);

            Vec row = {x2,
                       interp_nodal(grid, slice0.premium_unscaled, x),
                       complete.premium(w),
                       interp_nodal(grid, slice0.total_vol_unscaled, x),
                       complete.total_vol(w),
                       econ.alphas[0] * interp_nodal(grid, theta1, x),
                       econ.alphas[1] * interp_nodal(grid, theta2, x)};
            writer.add_row(row);
            run.rows.push_back(std::move(row));
        }
        run.csv_text = writer.text();
        run.clearing_violation = eq.max_clearing_violation();
        output.runs.push_back(std::move(run));
    }
    return output;
}

void write_put_experiment(const PutExperimentOutput& output, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    for (const PutRun& run : output.runs) {
        std::ofstream f(out_dir + "/" + run.filename, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + out_dir + "/" + run.filename);
        f << run.csv_text;
    }
}

namespace {

bool inner_half(const pde::Grid& grid, std::span<const double> x) {
    for (int a = 0; a < grid.dim; ++a) {
        const double span = grid.hi[a] - grid.lo[a];
        if (x[a] < grid.lo[a] + 0.25 * span || x[a] > grid.hi[a] - 0.25 * span) return false;
    }
    return true;
}

}  // namespace

GaussianCheckResult run_gaussian_check(const config::ExperimentConfig& cfg) {
    if (cfg.economy != config::EconomyKind::Gaussian)
        throw config::ConfigError("gaussian check: config economy must be gaussian");

    const economy::MarketModel model =
        economy::make_gaussian_economy(cfg.b0, cfg.b_agents, cfg.deltas);
    const closed_form::GaussianSpec spec =
        closed_form::GaussianSpec::from_economy(cfg.b0, cfg.b_agents, cfg.deltas);
    const pde::Grid grid = grid_for(cfg, model);
    pde::SolverOptions options;
    options.reg_n = cfg.reg_n;
    const pde::SolutionField field = pde::solve(model, grid, options);
    const economy::ScaledEconomy econ = economy::scale_economy(model);
    const equilibrium::EquilibriumField eq(field, econ, cfg.eps_nodal);

    GaussianCheckResult result;
    const int components = field.components;
    const int nodes = grid.num_nodes();
    for (int k = 0; k <= grid.time_steps; ++k) {
        const double t = grid.time_at(k);
        const equilibrium::EquilibriumSlice slice = eq.slice(k);
        for (int node = 0; node < nodes; ++node) {
            double xbuf[2];
            std::span<double> x(xbuf, static_cast<std::size_t>(grid.dim));
            grid.node_coords(node, x);
            if (!inner_half(grid, x)) continue;
            const closed_form::GaussianSolution oracle = closed_form::gaussian_solution(spec, t, x);
            result.max_value_error =
                std::max(result.max_value_error, std::fabs(field.value(k, node, 0) - oracle.stock));
            for (int c = 1; c < components; ++c)
                result.max_value_error = std::max(
                    result.max_value_error, std::fabs(field.value(k, node, c) - oracle.agents[c - 1]));
            const auto zeta = slice.zeta_at(node);
            for (int j = 0; j < grid.dim; ++j)
                result.max_zeta_error =
                    std::max(result.max_zeta_error, std::fabs(zeta[j] - spec.b0[j]));
        }
    }
    result.clearing_violation = eq.max_clearing_violation();
    result.nodal_fraction = equilibrium::nodal_set_fraction(field, cfg.nodal_eps);

    std::vector<pde::Grid> grids;
    for (int n : cfg.refine_resolutions)
        grids.push_back(pde::build_grid(grid.lo, grid.hi, n, cfg.n_t, model.x0));
    pde::OracleFn oracle = [&spec](double t, std::span<const double> x, std::span<double> out) {
        const closed_form::GaussianSolution sol = closed_form::gaussian_solution(spec, t, x);
        out[0] = sol.stock;
        for (std::size_t i = 0; i < sol.agents.size(); ++i) out[i + 1] = sol.agents[i];
    };
    result.convergence = pde::refine_study(model, grids, options, oracle);

    double min_order = std::numeric_limits<double>::infinity();
    for (const Vec& pair : result.convergence.orders) min_order = std::min(min_order, pair[0]);
    result.passed = result.max_value_error < 1e-2 && result.max_zeta_error < 1e-2 &&
                    min_order >= 1.8 && result.clearing_violation <= 1e-10;
    std::ostringstream details;
    details << "max_value_error=" << result.max_value_error
            << " max_zeta_error=" << result.max_zeta_error
            << " clearing=" << result.clearing_violation
            << " nodal_fraction=" << result.nodal_fraction << " min_order_v0=" << min_order;
    result.details = details.str();
    return result;
}

pde::ConvergenceReport run_refine(const config::ExperimentConfig& cfg) {
    const economy::MarketModel model = config::build_economy(cfg);
    const pde::Grid base = grid_for(cfg, model);
    std::vector<pde::Grid> grids;
    for (int n : cfg.refine_resolutions)
        grids.push_back(pde::build_grid(base.lo, base.hi, n, cfg.n_t, model.x0));
    pde::SolverOptions options;
    options.reg_n = cfg.reg_n;

    pde::OracleFn oracle = nullptr;
    if (cfg.economy == config::EconomyKind::Gaussian && norm(cfg.b0) > 0.0) {
        const closed_form::GaussianSpec spec =
            closed_form::GaussianSpec::from_economy(cfg.b0, cfg.b_agents, cfg.deltas);
        oracle = [spec](double t, std::span<const double> x, std::span<double> out) {
            const closed_form::GaussianSolution sol = closed_form::gaussian_solution(spec, t, x);
            out[0] = sol.stock;
            for (std::size_t i = 0; i < sol.agents.size(); ++i) out[i + 1] = sol.agents[i];
        };
    }
    return pde::refine_study(model, grids, options, oracle);
}

namespace {

double field_sup_difference(const pde::SolutionField& a, const pde::SolutionField& b) {
    double sup = 0.0;
    for (std::size_t k = 0; k < a.slices.size(); ++k)
        for (std::size_t i = 0; i < a.slices[k].size(); ++i)
            sup = std::max(sup, std::fabs(a.slices[k][i] - b.slices[k][i]));
    return sup;
}

std::string slice0_csv(const pde::SolutionField& field, const equilibrium::EquilibriumField& eq) {
    const pde::Grid& grid = field.grid;
    std::string header = grid.dim == 1 ? "x1" : "x1,x2";
    for (int c = 0; c < field.components; ++c) header += ",v" + std::to_string(c);
    header += ",premium_unscaled,totalvol_unscaled";
    const equilibrium::EquilibriumSlice s = eq.slice(0);
    for (int i = 0; i < s.agents; ++i) header += ",theta" + std::to_string(i + 1);
    csv::Writer writer(header);
    for (int node = 0; node < grid.num_nodes(); ++node) {
        Vec row;
        double xbuf[2];
        std::span<double> x(xbuf, static_cast<std::size_t>(grid.dim));
        grid.node_coords(node, x);
        for (int a = 0; a < grid.dim; ++a) row.push_back(x[a]);
        for (int c = 0; c < field.components; ++c) row.push_back(field.value(0, node, c));
        row.push_back(s.premium_unscaled[node]);
        row.push_back(s.total_vol_unscaled[node]);
        for (int i = 0; i < s.agents; ++i)
            row.push_back(s.thetas[static_cast<std::size_t>(node) * s.agents + i]);
        writer.add_row(row);
    }
    return writer.text();
}

}  // namespace

std::string SuiteResult::to_json() const {
    ordered_json j;
    j["all_passed"] = all_passed();
    j["checks"] = ordered_json::array();
    for (const CheckResult& c : checks)
        j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"details", c.details}});
    j["mc"] = {{"residual_mean_abs", report.residual_mean_abs},
               {"residual_scale", report.residual_scale},
               {"clearing_max_violation", report.clearing_max_violation},
               {"nodal_fraction", report.nodal_fraction},
               {"seed", report.seed},
               {"n_paths", report.n_paths},
               {"n_steps", report.n_steps},
               {"exit_count", report.exit_count}};
    j["martingale"] = ordered_json::array();
    for (const auto& m : report.martingale)
        j["martingale"].push_back({{"name", m.name},
                                   {"z_score", m.z_score},
                                   {"sample_mean", m.sample_mean},
                                   {"target", m.target},
                                   {"excluded_paths", m.excluded_paths}});
    return j.dump(2) + "\n";
}

SuiteResult run_validation_suite(const config::ExperimentConfig& cfg) {
    SuiteResult result;
    auto add = [&](const std::string& name, bool passed, const std::string& details) {
        result.checks.push_back({name, passed, details});
    };

    const economy::MarketModel model = config::build_economy(cfg);
    const economy::ScaledEconomy econ = economy::scale_economy(model);
    const pde::Grid grid = grid_for(cfg, model);
    pde::SolverOptions options;
    options.reg_n = cfg.reg_n;

    // Structural inequalities of the driver.
    {
        const generator::StructuralReport sr =
            generator::check_structural_conditions(econ.alphas, model.dim_d, 100000, cfg.seed);
        std::ostringstream details;
        details << "violations=" << sr.total_violations()
                << " worst_dissipation=" << sr.worst_dissipation_margin
                << " worst_gradient=" << sr.worst_gradient_margin;
        add("structural_conditions", sr.total_violations() == 0, details.str());
    }

    const pde::SolutionField field = pde::solve(model, grid, options);
    const equilibrium::EquilibriumField eq(field, econ, cfg.eps_nodal);

    // Clearing across every slice of the solve.
    const double clearing = eq.max_clearing_violation();
    add("clearing", clearing <= 1e-10, "max_violation=" + csv::format_double(clearing));

    // Nodal-set fraction; pinned expectation only where the oracle pins it.
    const double nodal = equilibrium::nodal_set_fraction(field, cfg.nodal_eps);
    if (cfg.economy == config::EconomyKind::Gaussian && norm(cfg.b0) > 0.0)
        add("nodal_set", nodal == 0.0, "fraction=" + csv::format_double(nodal));
    else
        add("nodal_set", true, "fraction=" + csv::format_double(nodal));

    // Economy-specific oracle comparisons.
    if (cfg.economy == config::EconomyKind::Gaussian) {
        const closed_form::GaussianSpec spec =
            closed_form::GaussianSpec::from_economy(cfg.b0, cfg.b_agents, cfg.deltas);
        double max_err = 0.0;
        for (int k = 0; k <= grid.time_steps; ++k) {
            const double t = grid.time_at(k);
            for (int node = 0; node < grid.num_nodes(); ++node) {
                double xbuf[2];
                std::span<double> x(xbuf, static_cast<std::size_t>(grid.dim));
                grid.node_coords(node, x);
                if (!inner_half(grid, x)) continue;
                const closed_form::GaussianSolution sol = closed_form::gaussian_solution(spec, t, x);
                max_err = std::max(max_err, std::fabs(field.value(k, node, 0) - sol.stock));
                for (int c = 1; c < field.components; ++c)
                    max_err = std::max(max_err,
                                       std::fabs(field.value(k, node, c) - sol.agents[c - 1]));
            }
        }
        add("gaussian_oracle", max_err < 1e-2, "max_inner_error=" + csv::format_double(max_err));
    } else if (cfg.economy == config::EconomyKind::PutOption) {
        const equilibrium::EquilibriumSlice slice0 = eq.slice(0);
        const int nodes = slice0.nodes;
        Vec theta1(nodes), theta2(nodes);
        for (int node = 0; node < nodes; ++node) {
            theta1[node] = slice0.thetas[static_cast<std::size_t>(node) * 2 + 0];
            theta2[node] = slice0.thetas[static_cast<std::size_t>(node) * 2 + 1];
        }
        CompleteBenchmark complete;
        complete.sum_delta = econ.sum_delta;
        complete.xi_vec = {cfg.sigma_w, cfg.sigma_w};
        complete.g_vec = complete.xi_vec;

        const double halfwidth = cfg.sweep_halfwidth_sigmas * cfg.sigma_w;
        const double n_over_2 = 0.5 * cfg.option_count;
        auto at = [&](double x2, const Vec& per_node) {
            const double xbuf[2] = {model.x0[0], x2};
            return interp_nodal(grid, per_node, std::span<const double>(xbuf, 2));
        };
        const double wbuf[2] = {model.x0[0] / cfg.sigma_w, 0.0};
        const double premium_complete = complete.premium(std::span<const double>(wbuf, 2));
        const double vol_complete = complete.total_vol(std::span<const double>(wbuf, 2));

        const double t1_left = econ.alphas[0] * at(-halfwidth, theta1);
        const double t1_right = econ.alphas[0] * at(halfwidth, theta1);
        const double t2_left = econ.alphas[1] * at(-halfwidth, theta2);
        const double t2_right = econ.alphas[1] * at(halfwidth, theta2);
        std::ostringstream tails;
        tails << "theta1 " << t1_left << "/" << t1_right << " vs " << econ.alphas[0] + n_over_2
              << "/" << econ.alphas[0] << "; theta2 " << t2_left << "/" << t2_right << " vs "
              << econ.alphas[1] - n_over_2 << "/" << econ.alphas[1];
        const bool tails_ok =
            std::fabs(t1_left - (econ.alphas[0] + n_over_2)) < 0.05 &&
            std::fabs(t1_right - econ.alphas[0]) < 0.05 &&
            std::fabs(t2_left - (econ.alphas[1] - n_over_2)) < 0.05 &&
            std::fabs(t2_right - econ.alphas[1]) < 0.05;
        add("put_position_tails", tails_ok, tails.str());

        const double prem_left = at(-halfwidth, slice0.premium_unscaled);
        const double prem_right = at(halfwidth, slice0.premium_unscaled);
        const double prem_atm = at(0.0, slice0.premium_unscaled);
        const double vol_left = at(-halfwidth, slice0.total_vol_unscaled);
        const double vol_right = at(halfwidth, slice0.total_vol_unscaled);
        std::ostringstream prem;
        prem << "premium tails " << prem_left << "/" << prem_right << " complete "
             << premium_complete << "; atm " << prem_atm << "; vol tails " << vol_left << "/"
             << vol_right << " complete " << vol_complete;
        const bool premium_ok = std::fabs(prem_left - premium_complete) < 5e-3 &&
                                std::fabs(prem_right - premium_complete) < 5e-3 &&
                                std::fabs(vol_left - vol_complete) < 5e-3 &&
                                std::fabs(vol_right - vol_complete) < 5e-3 &&
                                prem_atm >= premium_complete - 1e-6;
        add("put_premium_tails", premium_ok, prem.str());
    } else if (model.dim_d == 1 && model.constant_coeffs.has_value()) {
        double max_err = 0.0;
        for (int k = 0; k <= grid.time_steps; ++k) {
            const double t = grid.time_at(k);
            for (int node = 0; node < grid.num_nodes(); ++node) {
                const double x = grid.coord(0, node);
                if (!inner_half(grid, std::span<const double>(&x, 1))) continue;
                double aggregate = field.value(k, node, 0);
                for (int i = 0; i < econ.num_agents(); ++i)
                    aggregate += econ.alphas[i] * field.value(k, node, i + 1);
                const double oracle =
                    closed_form::cole_hopf_aggregate(model, t, x, cfg.quadrature_nodes);
                max_err = std::max(max_err, std::fabs(aggregate - oracle));
            }
        }
        add("aggregate_log_transform", max_err < 1e-2,
            "max_inner_error=" + csv::format_double(max_err));
    }

    // Regularization ladder: solutions must stabilize as the level grows.
    if (cfg.reg_ladder.size() >= 2) {
        Vec ladder = cfg.reg_ladder;
        std::sort(ladder.begin(), ladder.end());
        Vec diffs;
        pde::SolverOptions ladder_options = options;
        ladder_options.reg_n = ladder[0];
        pde::SolutionField prev = pde::solve(model, grid, ladder_options);
        for (std::size_t i = 1; i < ladder.size(); ++i) {
            ladder_options.reg_n = ladder[i];
            pde::SolutionField next = pde::solve(model, grid, ladder_options);
            diffs.push_back(field_sup_difference(prev, next));
            prev = std::move(next);
        }
        bool ok = diffs.back() < 5e-3;
        for (std::size_t i = 1; i < diffs.size(); ++i)
            if (diffs[i] > diffs[i - 1] + 1e-15) ok = false;
        std::ostringstream details;
        details << "diffs=";
        for (double d : diffs) details << d << " ";
        add("regularization_ladder", ok, details.str());
    }

    // Monte Carlo residual and martingale checks on the solved field
    // (optionally corrupted, to demonstrate the residual's sensitivity).
    {
        pde::SolutionField probe = field;
        if (cfg.inject_corruption) {
            for (auto& slice : probe.slices)
                for (std::size_t i = 0; i < slice.size(); i += probe.components) slice[i] += 0.1;
        }
        mc::GridFieldSampler sampler(probe, econ);
        mc::SimulateOptions sim;
        sim.n_paths = cfg.n_paths;
        sim.n_steps = cfg.n_steps;
        sim.seed = cfg.seed;
        sim.strict = cfg.strict;
        sim.box_lo = grid.lo;
        sim.box_hi = grid.hi;
        const mc::PathBatch batch = mc::simulate(model, sampler, sim);
        const mc::ResidualStats stats = mc::bsde_residual(batch, econ, cfg.reg_n);
        // A bias must stay both small against the terminal scale and
        // statistically consistent with zero up to discretization slack.
        double worst_bias = 0.0;
        for (std::size_t c = 0; c < stats.mean_signed.size(); ++c) {
            const double slack = std::max(10.0 * stats.std_error[c], 0.02 * stats.scale);
            worst_bias = std::max(worst_bias, std::fabs(stats.mean_signed[c]) / slack);
        }
        std::ostringstream details;
        details << "mean_abs_over_scale=" << stats.worst_mean_abs_over_scale
                << " bias_over_slack=" << worst_bias << " exit_count=" << batch.exit_count;
        add("bsde_residual", stats.worst_mean_abs_over_scale < 0.05 && worst_bias < 1.0,
            details.str());

        const std::vector<mc::MartingaleCheck> checks =
            mc::martingale_checks(batch, econ.alphas, cfg.eps_nodal);
        double worst_z = 0.0;
        for (const auto& c : checks) worst_z = std::max(worst_z, std::fabs(c.z_score));
        add("martingale", worst_z < 6.0, "worst_abs_z=" + csv::format_double(worst_z));

        result.report.residual_mean_abs = stats.worst_mean_abs_over_scale * stats.scale;
        result.report.residual_scale = stats.scale;
        result.report.clearing_max_violation = clearing;
        result.report.martingale = checks;
        result.report.nodal_fraction = nodal;
        result.report.seed = cfg.seed;
        result.report.n_paths = cfg.n_paths;
        result.report.n_steps = cfg.n_steps;
        result.report.exit_count = batch.exit_count;
    }

    // Determinism: a repeated solve and derived CSV must match byte for byte.
    {
        const pde::SolutionField again = pde::solve(model, grid, options);
        bool identical = field_sup_difference(field, again) == 0.0;
        const equilibrium::EquilibriumField eq_again(again, econ, cfg.eps_nodal);
        identical = identical && slice0_csv(field, eq) == slice0_csv(again, eq_again);
        add("determinism", identical, identical ? "bit-identical" : "outputs differ");
    }

    return result;
}

}  // namespace radner::experiments
