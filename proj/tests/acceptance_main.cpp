// SPDX-License-Identifier: MIT
//
// Acceptance suite: one self-contained binary, one line per criterion.
// Every tolerance is pinned here; the process exits nonzero if any
// criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "radner/closed_form.hpp"
#include "radner/config.hpp"
#include "radner/economy.hpp"
#include "radner/equilibrium.hpp"
#include "radner/experiments.hpp"
#include "radner/generator.hpp"
#include "radner/mc_validator.hpp"
#include "radner/pde_solver.hpp"
#include "radner/rng.hpp"

using namespace radner;

namespace {

int failures = 0;

void criterion(int number, const std::string& label, double budget_seconds,
               const std::function<bool(std::string&)>& body) {
    std::string details;
    bool ok = false;
    const auto start = std::chrono::steady_clock::now();
    try {
        ok = body(details);
    } catch (const std::exception& e) {
        details = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > budget_seconds) {
        ok = false;
        details += " [over time budget " + std::to_string(budget_seconds) + "s]";
    }
    std::printf("[%s] criterion %2d: %s (%.2fs) %s\n", ok ? "PASS" : "FAIL", number,
                label.c_str(), elapsed, details.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

const Vec kAlphas = {0.4, 0.6};
const Vec kDeltas = {1.0 / 3.0, 0.5};
const Vec kB0 = {1.0, 0.0};
const std::vector<Vec> kBAgents = {{0.5, 0.3}, {-0.2, 0.1}};
const double kSigmaW = 0.2 / 1.4142135623730951;

double max_clearing = 0.0;  // aggregated over every solve in the suite

void track_clearing(const pde::SolutionField& field, const economy::ScaledEconomy& econ) {
    const equilibrium::EquilibriumField eq(field, econ, 1e-8);
    max_clearing = std::max(max_clearing, eq.max_clearing_violation());
}

config::ExperimentConfig default_put_config() {
    config::ExperimentConfig cfg;
    cfg.economy = config::EconomyKind::PutOption;
    cfg.deltas = kDeltas;
    cfg.sigma_w = kSigmaW;
    cfg.option_counts = {1, 2};
    cfg.option_count = 2;
    cfg.delta1_sweep = {0.5};
    return cfg;
}

}  // namespace

int main() {
    // 1. Exactness of the driver on the degenerate set.
    criterion(1, "driver is exact on the degenerate stock row", 1.0, [](std::string& details) {
        rng::Stream s(101, 0);
        int bad = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            generator::ZMatrix z(2, 2);
            const double scale = std::pow(10.0, s.next_uniform(-3.0, 3.0));
            for (int i = 1; i <= 2; ++i)
                for (int j = 0; j < 2; ++j) z.row(i)[j] = scale * s.next_normal();
            const Vec f = generator::eval_raw(z, kAlphas);
            if (f[0] != 0.0) ++bad;
            for (int i = 1; i <= 2; ++i) {
                double zi_sq = 0.0;
                for (int j = 0; j < 2; ++j) zi_sq += z.row(i)[j] * z.row(i)[j];
                if (f[i] != -0.5 * zi_sq) ++bad;
            }
        }
        details = "mismatches=" + std::to_string(bad) + "/1000";
        return bad == 0;
    });

    // 2. Structural inequalities over random draws.
    criterion(2, "structural inequalities hold on 1e5 draws", 10.0, [](std::string& details) {
        const auto report = generator::check_structural_conditions(kAlphas, 2, 100000, 2024);
        std::ostringstream os;
        os << "violations=" << report.total_violations()
           << " worst_dissipation=" << report.worst_dissipation_margin
           << " worst_gradient=" << report.worst_gradient_margin
           << " worst_homogeneity_rel=" << report.worst_homogeneity_rel;
        details = os.str();
        return report.total_violations() == 0;
    });

    // 3. Solver equivalence with the linear-payoff closed form.
    criterion(3, "linear-payoff economy matches its closed form", 120.0,
              [](std::string& details) {
                  config::ExperimentConfig cfg;  // defaults are this economy
                  cfg.b0 = kB0;
                  cfg.b_agents = kBAgents;
                  cfg.deltas = kDeltas;
                  cfg.refine_resolutions = {41, 81, 161};
                  const auto result = experiments::run_gaussian_check(cfg);
                  max_clearing = std::max(max_clearing, result.clearing_violation);
                  details = result.details;
                  double min_order = std::numeric_limits<double>::infinity();
                  for (const Vec& pair : result.convergence.orders)
                      min_order = std::min(min_order, pair[0]);
                  return result.max_value_error < 1e-2 && result.max_zeta_error < 1e-2 &&
                         min_order >= 1.8;
              });

    // 5 (computed before 4 so the clearing aggregate includes these solves).
    experiments::PutExperimentOutput put_output;
    criterion(5, "put-option experiment limits", 300.0, [&put_output](std::string& details) {
        const auto cfg = default_put_config();
        put_output = experiments::run_put_option_experiment(cfg);
        for (const auto& run : put_output.runs)
            max_clearing = std::max(max_clearing, run.clearing_violation);

        const experiments::PutRun* n2 = nullptr;
        for (const auto& run : put_output.runs)
            if (run.option_count == 2 && std::fabs(run.delta1 - kDeltas[0]) < 1e-12) n2 = &run;
        if (!n2) {
            details = "missing N=2 run";
            return false;
        }
        // columns: x2, premium_inc, premium_com, vol_inc, vol_com, th1, th2
        const Vec& left = n2->rows.front();
        const Vec& right = n2->rows.back();
        const Vec& middle = n2->rows[n2->rows.size() / 2];
        const double alpha1 = 0.4, alpha2 = 0.6, n_over_2 = 1.0;

        std::ostringstream os;
        os << "th1 " << left[5] << "->" << right[5] << " th2 " << left[6] << "->" << right[6]
           << " prem_com " << middle[2] << " prem_atm " << middle[1];
        details = os.str();

        bool ok = std::fabs(left[5] - (alpha1 + n_over_2)) < 0.05 &&
                  std::fabs(right[5] - alpha1) < 0.05 &&
                  std::fabs(left[6] - (alpha2 - n_over_2)) < 0.05 &&
                  std::fabs(right[6] - alpha2) < 0.05;
        for (const Vec& row : n2->rows) ok = ok && std::fabs(row[2] - 0.048) <= 1e-3;
        ok = ok && std::fabs(middle[0]) < 1e-12;          // the sweep is centered
        ok = ok && middle[1] >= middle[2] - 1e-9;         // incomplete premium at the money
        ok = ok && std::fabs(left[1] - left[2]) < 5e-3 && std::fabs(right[1] - right[2]) < 5e-3;
        ok = ok && std::fabs(left[3] - left[4]) < 5e-3 && std::fabs(right[3] - right[4]) < 5e-3;
        return ok;
    });

    // 6. Monte Carlo residual on the closed-form field.
    criterion(6, "pathwise residual of the closed-form field", 60.0, [](std::string& details) {
        const auto model = economy::make_gaussian_economy(kB0, kBAgents, kDeltas);
        const auto econ = economy::scale_economy(model);
        const auto spec = closed_form::GaussianSpec::from_economy(kB0, kBAgents, kDeltas);
        mc::GaussianFieldSampler sampler(spec);
        mc::SimulateOptions options;
        options.n_paths = 10000;
        options.n_steps = 400;
        options.seed = 893201;
        const auto batch = mc::simulate(model, sampler, options);
        const auto stats = mc::bsde_residual(batch, econ, 50.0);
        const auto checks = mc::martingale_checks(batch, econ.alphas);
        double worst_z = 0.0;
        for (const auto& c : checks) worst_z = std::max(worst_z, std::fabs(c.z_score));
        std::ostringstream os;
        os << "mean_abs/scale=" << stats.worst_mean_abs_over_scale
           << " signed_z=" << stats.worst_signed_zscore << " martingale_z=" << worst_z;
        details = os.str();
        return stats.worst_mean_abs_over_scale < 0.01 && stats.worst_signed_zscore < 5.0 &&
               worst_z < 4.0;
    });

    // 7. Stability in the regularization level.
    criterion(7, "regularization ladder stabilizes", 300.0, [](std::string& details) {
        const auto model = economy::make_put_option_economy(2, kSigmaW, kDeltas);
        Vec lo, hi;
        pde::default_box(model, 5.0, lo, hi);
        const pde::Grid grid = pde::build_grid(lo, hi, 161, 200, model.x0);
        const auto econ = economy::scale_economy(model);
        std::vector<pde::SolutionField> fields;
        for (double reg : {25.0, 50.0, 100.0}) {
            pde::SolverOptions options;
            options.reg_n = reg;
            fields.push_back(pde::solve(model, grid, options));
            track_clearing(fields.back(), econ);
        }
        Vec diffs;
        for (std::size_t i = 1; i < fields.size(); ++i) {
            double sup = 0.0;
            for (std::size_t k = 0; k < fields[i].slices.size(); ++k)
                for (std::size_t v = 0; v < fields[i].slices[k].size(); ++v)
                    sup = std::max(sup,
                                   std::fabs(fields[i].slices[k][v] - fields[i - 1].slices[k][v]));
            diffs.push_back(sup);
        }
        std::ostringstream os;
        os << "diff(25,50)=" << diffs[0] << " diff(50,100)=" << diffs[1];
        details = os.str();
        return diffs[1] <= diffs[0] + 1e-15 && diffs[1] < 5e-3;
    });

    // 8. Nodal-set diagnostic on both regimes.
    criterion(8, "nodal-set fractions at the two extremes", 120.0, [](std::string& details) {
        const auto live = economy::make_gaussian_economy(kB0, kBAgents, kDeltas);
        Vec lo, hi;
        pde::default_box(live, 5.0, lo, hi);
        const pde::Grid grid = pde::build_grid(lo, hi, 81, 100, live.x0);
        const auto live_field = pde::solve(live, grid, {});
        track_clearing(live_field, economy::scale_economy(live));
        const double live_fraction = equilibrium::nodal_set_fraction(live_field, 1e-6);

        const auto dead = economy::make_gaussian_economy({0.0, 0.0}, kBAgents, {1.0, 1.0});
        const auto dead_field = pde::solve(dead, grid, {});
        const double dead_fraction = equilibrium::nodal_set_fraction(dead_field, 1e-6);

        std::ostringstream os;
        os << "live=" << live_fraction << " dead=" << dead_fraction;
        details = os.str();
        return live_fraction == 0.0 && dead_fraction == 1.0;
    });

    // 9. Aggregate log-transform identity in one dimension.
    criterion(9, "one-dimensional aggregate matches the log transform", 120.0,
              [](std::string& details) {
                  economy::MarketModel m;
                  m.dim_d = 1;
                  m.num_agents = 2;
                  m.deltas = kDeltas;
                  m.x0 = {0.0};
                  m.drift = [](double, std::span<const double>, std::span<double> out) {
                      out[0] = 0.0;
                  };
                  m.vol = [](double, std::span<const double>, std::span<double> out) {
                      out[0] = 1.0;
                  };
                  RowMat sigma(1, 1);
                  sigma.at(0, 0) = 1.0;
                  m.constant_coeffs = economy::ConstantCoefficients{{0.0}, sigma};
                  const double sum_delta = 5.0 / 6.0;
                  m.dividend = [sum_delta](std::span<const double> x) {
                      return sum_delta * (x[0] + 0.05 * x[0] * x[0] + 0.25 * std::tanh(x[0]));
                  };
                  m.endowments.push_back([](std::span<const double> x) {
                      return (1.0 / 3.0) * 0.3 * std::tanh(x[0]);
                  });
                  m.endowments.push_back([](std::span<const double> x) {
                      return 0.5 * (0.1 * x[0] - 0.2 * std::tanh(x[0]));
                  });

                  const pde::Grid grid = pde::build_grid({-5.0}, {5.0}, 161, 200, m.x0);
                  const auto field = pde::solve(m, grid, {});
                  const auto econ = economy::scale_economy(m);
                  track_clearing(field, econ);

                  double worst = 0.0;
                  for (int k = 0; k <= grid.time_steps; ++k) {
                      const double t = grid.time_at(k);
                      for (int node = 0; node < grid.nodes_per_axis; ++node) {
                          const double x = grid.coord(0, node);
                          if (std::fabs(x) > 2.5) continue;  // inner half of the box
                          double aggregate = field.value(k, node, 0);
                          for (int i = 0; i < 2; ++i)
                              aggregate += econ.alphas[i] * field.value(k, node, i + 1);
                          const double oracle = closed_form::cole_hopf_aggregate(m, t, x, 200);
                          worst = std::max(worst, std::fabs(aggregate - oracle));
                      }
                  }
                  details = "max_inner_error=" + std::to_string(worst);
                  return worst < 1e-2;
              });

    // 4. Clearing, aggregated over every solve the suite performed.
    criterion(4, "positions clear at every non-fallback node", 1.0, [](std::string& details) {
        std::ostringstream os;
        os << "max_violation=" << max_clearing;
        details = os.str();
        return max_clearing <= 1e-10;
    });

    // 10. Determinism of emitted artifacts.
    criterion(10, "identical configs give byte-identical outputs", 120.0,
              [](std::string& details) {
                  auto cfg = default_put_config();
                  cfg.n_x = 41;
                  cfg.n_t = 50;
                  cfg.option_counts = {2};
                  cfg.delta1_sweep = {};
                  cfg.sweep_samples = 41;
                  const auto a = experiments::run_put_option_experiment(cfg);
                  const auto b = experiments::run_put_option_experiment(cfg);
                  bool same = a.runs.size() == b.runs.size();
                  for (std::size_t i = 0; same && i < a.runs.size(); ++i)
                      same = a.runs[i].csv_text == b.runs[i].csv_text;

                  config::ExperimentConfig vcfg;
                  vcfg.b0 = kB0;
                  vcfg.b_agents = kBAgents;
                  vcfg.deltas = kDeltas;
                  vcfg.n_x = 41;
                  vcfg.n_t = 50;
                  vcfg.n_paths = 500;
                  vcfg.n_steps = 100;
                  vcfg.reg_ladder = {25.0, 50.0};
                  const auto r1 = experiments::run_validation_suite(vcfg);
                  const auto r2 = experiments::run_validation_suite(vcfg);
                  same = same && r1.to_json() == r2.to_json();
                  details = same ? "csv and report bytes identical" : "outputs differ";
                  return same;
              });

    std::printf("%d of 10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
