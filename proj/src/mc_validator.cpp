// SPDX-License-Identifier: MIT
#include "radner/mc_validator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "radner/rng.hpp"

namespace radner::mc {

GridFieldSampler::GridFieldSampler(const pde::SolutionField& field, economy::ScaledEconomy econ)
    : field_(&field), econ_(std::move(econ)) {}

void GridFieldSampler::ensure_slices(int lo) const {
    if (cached_lo_ == lo) return;
    if (cached_lo_ >= 0 && cached_lo_ == lo - 1) {
        grad_lo_ = std::move(grad_hi_);
        grad_hi_ = field_->gradient_slice(std::min(lo + 1, field_->grid.time_steps));
    } else {
        grad_lo_ = field_->gradient_slice(lo);
        grad_hi_ = field_->gradient_slice(std::min(lo + 1, field_->grid.time_steps));
    }
    cached_lo_ = lo;
}

void GridFieldSampler::interpolate(double t, std::span<const double> x, bool want_gradient,
                                   std::span<double> out_v, std::vector<double>* out_grad) const {
    const pde::Grid& grid = field_->grid;
    const int components = field_->components;
    const int d = grid.dim;

    double kf = t * grid.time_steps;
    kf = std::clamp(kf, 0.0, static_cast<double>(grid.time_steps));
    int lo = std::min(static_cast<int>(std::floor(kf)), grid.time_steps - 1);
    const double wt = kf - lo;

    const pde::CellWeights cw = pde::locate_cell(grid, x);
    if (!out_v.empty()) {
        for (int c = 0; c < components; ++c) {
            double a = 0.0, b = 0.0;
            for (int q = 0; q < cw.count; ++q) {
                a += cw.weights[q] * field_->value(lo, cw.corners[q], c);
                b += cw.weights[q] * field_->value(lo + 1, cw.corners[q], c);
            }
            out_v[c] = (1.0 - wt) * a + wt * b;
        }
    }
    if (want_gradient) {
        ensure_slices(lo);
        out_grad->assign(static_cast<std::size_t>(components) * d, 0.0);
        for (int c = 0; c < components; ++c)
            for (int j = 0; j < d; ++j) {
                double a = 0.0, b = 0.0;
                for (int q = 0; q < cw.count; ++q) {
                    const std::size_t idx =
                        (static_cast<std::size_t>(cw.corners[q]) * components + c) * d + j;
                    a += cw.weights[q] * grad_lo_[idx];
                    b += cw.weights[q] * grad_hi_[idx];
                }
                (*out_grad)[static_cast<std::size_t>(c) * d + j] = (1.0 - wt) * a + wt * b;
            }
    }
}

void GridFieldSampler::values(double t, std::span<const double> x, std::span<double> out) const {
    interpolate(t, x, false, out, nullptr);
}

void GridFieldSampler::z_matrix(double t, std::span<const double> x,
                                generator::ZMatrix& out) const {
    const int d = dim();
    const int comps = components();
    std::vector<double> grad;
    interpolate(t, x, true, {}, &grad);

    double sigbuf[4];
    econ_.model.vol(t, x, std::span<double>(sigbuf, static_cast<std::size_t>(d) * d));
    out = generator::ZMatrix(comps - 1, d);
    for (int c = 0; c < comps; ++c)
        for (int l = 0; l < d; ++l) {
            double acc = 0.0;
            for (int j = 0; j < d; ++j) acc += grad[static_cast<std::size_t>(c) * d + j] * sigbuf[j * d + l];
            out.row(c)[l] = acc;
        }
}

GaussianFieldSampler::GaussianFieldSampler(closed_form::GaussianSpec spec)
    : spec_(std::move(spec)) {
    spec_.validate();
}

void GaussianFieldSampler::values(double t, std::span<const double> x,
                                  std::span<double> out) const {
    const closed_form::GaussianSolution sol = closed_form::gaussian_solution(spec_, t, x);
    out[0] = sol.stock;
    for (std::size_t i = 0; i < sol.agents.size(); ++i) out[i + 1] = sol.agents[i];
}

void GaussianFieldSampler::z_matrix(double, std::span<const double>,
                                    generator::ZMatrix& out) const {
    const int agents = static_cast<int>(spec_.b_agents.size());
    const int d = static_cast<int>(spec_.b0.size());
    out = generator::ZMatrix(agents, d);
    for (int j = 0; j < d; ++j) out.row(0)[j] = spec_.b0[j];
    for (int i = 0; i < agents; ++i)
        for (int j = 0; j < d; ++j) out.row(i + 1)[j] = spec_.b_agents[i][j];
}

PathBatch simulate(const economy::MarketModel& model, const FieldSampler& sampler,
                   const SimulateOptions& options) {
    const int d = model.dim_d;
    const int components = sampler.components();
    const int np = options.n_paths;
    const int ns = options.n_steps;
    if (np < 1 || ns < 1) throw std::invalid_argument("simulate: need paths and steps");
    if (sampler.dim() != d) throw std::invalid_argument("simulate: sampler dimension mismatch");

    PathBatch batch;
    batch.n_paths = np;
    batch.n_steps = ns;
    batch.dim = d;
    batch.components = components;
    batch.seed = options.seed;
    batch.x.resize(static_cast<std::size_t>(np) * (ns + 1) * d);
    batch.dw.resize(static_cast<std::size_t>(np) * ns * d);
    batch.v.resize(static_cast<std::size_t>(np) * (ns + 1) * components);
    batch.z.resize(static_cast<std::size_t>(np) * (ns + 1) * components * d);
    batch.exit_step.assign(np, -1);

    const double dt = batch.dt();
    const double sqrt_dt = std::sqrt(dt);
    const bool absorb = options.box_lo.has_value();

    std::vector<double> state(static_cast<std::size_t>(np) * d);
    for (int p = 0; p < np; ++p)
        for (int j = 0; j < d; ++j) state[static_cast<std::size_t>(p) * d + j] = model.x0[j];

    generator::ZMatrix zbuf;
    Vec bbuf(d), sigbuf(static_cast<std::size_t>(d) * d);
    for (int k = 0; k <= ns; ++k) {
        const double t = static_cast<double>(k) / ns;
        for (int p = 0; p < np; ++p) {
            double* xp = state.data() + static_cast<std::size_t>(p) * d;
            const std::span<const double> xs(xp, static_cast<std::size_t>(d));

            // record x, v, z at (t_k, X_k)
            std::copy(xp, xp + d,
                      batch.x.begin() + (static_cast<std::size_t>(p) * (ns + 1) + k) * d);
            sampler.values(t, xs,
                           {batch.v.data() + (static_cast<std::size_t>(p) * (ns + 1) + k) *
                                                 components,
                            static_cast<std::size_t>(components)});
            sampler.z_matrix(t, xs, zbuf);
            std::copy(zbuf.data.begin(), zbuf.data.end(),
                      batch.z.begin() +
                          (static_cast<std::size_t>(p) * (ns + 1) + k) * components * d);

            if (k == ns) continue;
            double* dwp = batch.dw.data() + (static_cast<std::size_t>(p) * ns + k) * d;
            if (batch.exit_step[p] >= 0) {
                for (int j = 0; j < d; ++j) dwp[j] = 0.0;  // frozen path
                continue;
            }
            model.drift(t, xs, bbuf);
            model.vol(t, xs, sigbuf);
            for (int j = 0; j < d; ++j)
                dwp[j] = sqrt_dt * rng::normal(options.seed, static_cast<std::uint64_t>(p) + 1,
                                               static_cast<std::uint64_t>(k), static_cast<std::uint32_t>(j));
            for (int i = 0; i < d; ++i) {
                double incr = bbuf[i] * dt;
                for (int j = 0; j < d; ++j) incr += sigbuf[static_cast<std::size_t>(i) * d + j] * dwp[j];
                xp[i] += incr;
            }
            if (absorb) {
                bool exited = false;
                for (int j = 0; j < d; ++j) {
                    if (xp[j] < (*options.box_lo)[j]) { xp[j] = (*options.box_lo)[j]; exited = true; }
                    if (xp[j] > (*options.box_hi)[j]) { xp[j] = (*options.box_hi)[j]; exited = true; }
                }
                if (exited) {
                    batch.exit_step[p] = k + 1;
                    ++batch.exit_count;
                }
            }
        }
    }

    const double exit_fraction = static_cast<double>(batch.exit_count) / np;
    if (options.strict && exit_fraction > options.max_exit_fraction)
        throw std::runtime_error("simulate: too many paths left the domain (" +
                                 std::to_string(batch.exit_count) + " of " + std::to_string(np) +
                                 ")");
    return batch;
}

ResidualStats bsde_residual(const PathBatch& batch, const economy::ScaledEconomy& econ,
                            double reg_n) {
    const int components = batch.components;
    const int d = batch.dim;
    const int np = batch.n_paths;
    const int ns = batch.n_steps;
    const double dt = batch.dt();
    const generator::RegularizationParams params{reg_n};

    ResidualStats stats;
    stats.mean_abs.assign(components, 0.0);
    stats.mean_signed.assign(components, 0.0);
    stats.std_error.assign(components, 0.0);

    Vec sum(components, 0.0), sum_sq(components, 0.0), sum_abs(components, 0.0);
    Vec fbuf(components), integral(components);
    generator::ZMatrix zk(components - 1, d);

    double scale = 0.0;
    for (int p = 0; p < np; ++p)
        for (int c = 0; c < components; ++c)
            scale = std::max(scale, std::fabs(batch.v_at(p, ns)[c]));
    stats.scale = std::max(scale, 1e-12);

    for (int p = 0; p < np; ++p) {
        integral.assign(components, 0.0);
        Vec stoch(components, 0.0);
        for (int k = 0; k < ns; ++k) {
            const double* zp = batch.z_at(p, k);
            std::copy(zp, zp + static_cast<std::size_t>(components) * d, zk.data.begin());
            const std::span<const double> xk(batch.x_at(p, k), static_cast<std::size_t>(d));
            generator::eval_regularized(xk, zk, params, econ.alphas, fbuf);
            const double* dwk = batch.dw_at(p, k);
            for (int c = 0; c < components; ++c) {
                integral[c] += fbuf[c] * dt;
                double zdw = 0.0;
                for (int j = 0; j < d; ++j) zdw += zp[static_cast<std::size_t>(c) * d + j] * dwk[j];
                stoch[c] += zdw;
            }
        }
        const std::span<const double> x1(batch.x_at(p, ns), static_cast<std::size_t>(d));
        for (int c = 0; c < components; ++c) {
            const double terminal = econ.terminal_component(c, x1);
            const double res = batch.v_at(p, 0)[c] - (terminal + integral[c] - stoch[c]);
            sum[c] += res;
            sum_sq[c] += res * res;
            sum_abs[c] += std::fabs(res);
        }
    }

    for (int c = 0; c < components; ++c) {
        stats.mean_abs[c] = sum_abs[c] / np;
        stats.mean_signed[c] = sum[c] / np;
        const double var = std::max(0.0, sum_sq[c] / np - stats.mean_signed[c] * stats.mean_signed[c]);
        stats.std_error[c] = std::sqrt(var / np);
        stats.worst_mean_abs_over_scale =
            std::max(stats.worst_mean_abs_over_scale, stats.mean_abs[c] / stats.scale);
        const double se = std::max(stats.std_error[c], 1e-12 * stats.scale);
        stats.worst_signed_zscore =
            std::max(stats.worst_signed_zscore, std::fabs(stats.mean_signed[c]) / se);
    }
    return stats;
}

std::vector<MartingaleCheck> martingale_checks(const PathBatch& batch,
                                               std::span<const double> alphas,
                                               double eps_nodal) {
    const int components = batch.components;
    const int agents = components - 1;
    const int d = batch.dim;
    const int np = batch.n_paths;
    const int ns = batch.n_steps;
    const double dt = batch.dt();

    std::vector<MartingaleCheck> checks;
    RowMat gammas(agents, d);

    for (int i = 0; i < agents; ++i) {
        double sum_price = 0.0, sum_price_sq = 0.0;
        double sum_gain = 0.0, sum_gain_sq = 0.0;
        int excluded = 0;
        const double s0 = batch.v_at(0, 0)[0];

        for (int p = 0; p < np; ++p) {
            double log_deflator = 0.0;
            double gains = 0.0;
            bool ok = true;
            for (int k = 0; k < ns; ++k) {
                const double* zk = batch.z_at(p, k);
                const std::span<const double> zeta(zk, static_cast<std::size_t>(d));
                for (int a = 0; a < agents; ++a)
                    for (int j = 0; j < d; ++j)
                        gammas.at(a, j) = zk[static_cast<std::size_t>(a + 1) * d + j];
                const Vec thetas = equilibrium::thetas_from(zeta, gammas, alphas, eps_nodal);

                const double* dwk = batch.dw_at(p, k);
                double q_dw = 0.0, q_sq = 0.0;
                for (int j = 0; j < d; ++j) {
                    const double q = gammas.at(i, j) + thetas[i] * zeta[j];
                    q_dw += q * dwk[j];
                    q_sq += q * q;
                }
                log_deflator += -q_dw - 0.5 * q_sq * dt;
                gains += thetas[i] * (batch.v_at(p, k + 1)[0] - batch.v_at(p, k)[0]);
                if (std::fabs(log_deflator) > 50.0) {
                    ok = false;
                    break;
                }
            }
            if (!ok) {
                ++excluded;
                continue;
            }
            const double w = std::exp(log_deflator);
            const double ws = w * batch.v_at(p, ns)[0];
            const double wg = w * gains;
            sum_price += ws;
            sum_price_sq += ws * ws;
            sum_gain += wg;
            sum_gain_sq += wg * wg;
        }

        const int used = np - excluded;
        auto push = [&](const std::string& name, double sum, double sum_sq, double target) {
            MartingaleCheck c;
            c.name = name;
            c.excluded_paths = excluded;
            c.sample_mean = sum / used;
            c.target = target;
            const double var = std::max(0.0, sum_sq / used - c.sample_mean * c.sample_mean);
            const double se = std::max(std::sqrt(var / used), 1e-14 * (1.0 + std::fabs(target)));
            c.z_score = (c.sample_mean - target) / se;
            checks.push_back(std::move(c));
        };
        push("deflated_price_agent" + std::to_string(i + 1), sum_price, sum_price_sq, s0);
        push("deflated_gains_agent" + std::to_string(i + 1), sum_gain, sum_gain_sq, 0.0);
    }
    return checks;
}

}  // namespace radner::mc
