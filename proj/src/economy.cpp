// SPDX-License-Identifier: MIT
#include "radner/economy.hpp"

#include <cmath>

#include "radner/rng.hpp"

namespace radner::economy {

void validate_model(const MarketModel& model) {
    if (model.dim_d < 1) throw InvalidModel("model: dim_d must be positive");
    if (model.num_agents < 1) throw InvalidModel("model: num_agents must be positive");
    if (static_cast<int>(model.deltas.size()) != model.num_agents)
        throw InvalidModel("model: deltas size does not match num_agents");
    for (double d : model.deltas)
        if (!(d > 0.0)) throw InvalidModel("model: risk tolerances must be positive");
    if (static_cast<int>(model.endowments.size()) != model.num_agents)
        throw InvalidModel("model: endowments size does not match num_agents");
    if (static_cast<int>(model.x0.size()) != model.dim_d)
        throw InvalidModel("model: x0 size does not match dim_d");
    if (!model.drift || !model.vol || !model.dividend)
        throw InvalidModel("model: drift, vol and dividend must be set");

    if (!std::isfinite(model.dividend(model.x0)))
        throw InvalidModel("model: dividend not finite at x0");
    for (const auto& e : model.endowments)
        if (!std::isfinite(e(model.x0))) throw InvalidModel("model: endowment not finite at x0");
}

void probe_ellipticity(const MarketModel& model, const RowMat& box, int samples,
                       std::uint64_t seed) {
    const int d = model.dim_d;
    const double lambda = model.ellipticity_lambda;
    rng::Stream stream(seed, /*stream=*/0x0e11u);

    Vec x(d), u(d), sig_u(d);
    RowMat sigma(d, d);
    for (int s = 0; s < samples; ++s) {
        const double t = stream.next_uniform();
        for (int j = 0; j < d; ++j) x[j] = stream.next_uniform(box.at(j, 0), box.at(j, 1));
        for (int j = 0; j < d; ++j) u[j] = stream.next_normal();
        const double u2 = norm_sq(u);
        if (u2 == 0.0) continue;

        model.vol(t, x, sigma.data);
        // u^T A u with A = sigma sigma^T equals |sigma^T u|^2.
        for (int j = 0; j < d; ++j) {
            double acc = 0.0;
            for (int i = 0; i < d; ++i) acc += sigma.at(i, j) * u[i];
            sig_u[j] = acc;
        }
        const double quad = norm_sq(sig_u);
        if (!(quad >= lambda * u2) || !(quad <= u2 / lambda))
            throw InvalidModel("model: ellipticity bounds violated at sampled point");
    }
}

ScaledEconomy scale_economy(const MarketModel& model) {
    validate_model(model);

    ScaledEconomy out;
    out.model = model;
    out.sum_delta = 0.0;
    for (double d : model.deltas) out.sum_delta += d;

    out.alphas.resize(model.num_agents);
    for (int i = 0; i < model.num_agents; ++i) out.alphas[i] = model.deltas[i] / out.sum_delta;

    const double inv_sum = 1.0 / out.sum_delta;
    Payoff dividend = model.dividend;
    out.scaled_dividend = [dividend, inv_sum](std::span<const double> x) {
        return dividend(x) * inv_sum;
    };
    out.scaled_endowments.reserve(model.num_agents);
    for (int i = 0; i < model.num_agents; ++i) {
        Payoff e = model.endowments[i];
        const double inv_delta = 1.0 / model.deltas[i];
        out.scaled_endowments.push_back(
            [e, inv_delta](std::span<const double> x) { return e(x) * inv_delta; });
    }
    return out;
}

namespace {

MarketModel make_constant_coefficient_model(int d, const Vec& drift_b, const RowMat& sigma) {
    MarketModel m;
    m.dim_d = d;
    m.x0.assign(d, 0.0);
    Vec b = drift_b;
    RowMat s = sigma;
    m.drift = [b](double, std::span<const double>, std::span<double> out) {
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = b[j];
    };
    m.vol = [s](double, std::span<const double>, std::span<double> out) {
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = s.data[j];
    };
    m.constant_coeffs = ConstantCoefficients{b, s};
    return m;
}

RowMat identity(int d, double scale) {
    RowMat m(d, d);
    for (int j = 0; j < d; ++j) m.at(j, j) = scale;
    return m;
}

}  // namespace

MarketModel make_gaussian_economy(const Vec& b0, const std::vector<Vec>& b_agents,
                                  const Vec& deltas) {
    const int d = static_cast<int>(b0.size());
    const int agents = static_cast<int>(b_agents.size());
    if (agents != static_cast<int>(deltas.size()))
        throw InvalidModel("gaussian economy: deltas size does not match agent count");
    for (const auto& b : b_agents)
        if (static_cast<int>(b.size()) != d)
            throw InvalidModel("gaussian economy: endowment vector dimension mismatch");

    MarketModel m = make_constant_coefficient_model(d, Vec(d, 0.0), identity(d, 1.0));
    m.num_agents = agents;
    m.deltas = deltas;

    double sum_delta = 0.0;
    for (double dl : deltas) sum_delta += dl;

    // Built so that the *scaled* payoffs are exactly b0.x and b_agents[i].x.
    Vec b0_copy = b0;
    m.dividend = [b0_copy, sum_delta](std::span<const double> x) {
        return sum_delta * dot(b0_copy, x);
    };
    for (int i = 0; i < agents; ++i) {
        Vec bi = b_agents[i];
        const double di = deltas[i];
        m.endowments.push_back(
            [bi, di](std::span<const double> x) { return di * dot(bi, x); });
    }
    validate_model(m);
    return m;
}

double smoothed_negative_part(double s, double eps) {
    if (eps <= 0.0) return s < 0.0 ? -s : 0.0;
    if (s <= -eps) return -s;
    if (s >= eps) return 0.0;
    // Convolution of max(-s,0) with the quartic kernel (15/16)(1-u^2)^2.
    const double t = s / eps;
    const double f1 = 1.0 / 6.0 - (t * t / 2.0 - std::pow(t, 4) / 2.0 + std::pow(t, 6) / 6.0);
    const double f2 = 8.0 / 15.0 - (t - 2.0 * std::pow(t, 3) / 3.0 + std::pow(t, 5) / 5.0);
    return eps * (15.0 / 16.0) * (f1 - t * f2);
}

MarketModel make_put_option_economy(int n_options, double sigma_w, const Vec& deltas,
                                    double mollify_eps) {
    if (n_options < 0) throw InvalidModel("put economy: option count must be nonnegative");
    if (!(sigma_w > 0.0)) throw InvalidModel("put economy: sigma_w must be positive");
    if (deltas.size() != 2) throw InvalidModel("put economy: exactly two agents");

    MarketModel m = make_constant_coefficient_model(2, Vec(2, 0.0), identity(2, sigma_w));
    m.num_agents = 2;
    m.deltas = deltas;
    m.dividend = [](std::span<const double> x) { return x[0] + x[1]; };

    const double n = static_cast<double>(n_options);
    const double eps = mollify_eps;
    m.endowments.push_back([n, eps](std::span<const double> x) {
        return n * smoothed_negative_part(x[1], eps);
    });
    m.endowments.push_back([n, eps](std::span<const double> x) {
        return -n * smoothed_negative_part(x[1], eps);
    });
    validate_model(m);
    return m;
}

double PolynomialPayoff::operator()(std::span<const double> x) const {
    double total = 0.0;
    for (const auto& term : terms) {
        double v = term.coef;
        for (std::size_t j = 0; j < term.powers.size(); ++j) {
            for (int p = 0; p < term.powers[j]; ++p) v *= x[j];
        }
        total += v;
    }
    return total;
}

double TabulatedPayoff::operator()(std::span<const double> x) const {
    const int d = static_cast<int>(lo.size());
    const int n = nodes_per_axis;
    auto locate = [&](int axis, double v, int& idx, double& w) {
        const double h = (hi[axis] - lo[axis]) / (n - 1);
        double s = (v - lo[axis]) / h;
        if (s <= 0.0) { idx = 0; w = 0.0; return; }
        if (s >= n - 1) { idx = n - 2; w = 1.0; return; }
        idx = static_cast<int>(s);
        w = s - idx;
    };
    if (d == 1) {
        int i; double w;
        locate(0, x[0], i, w);
        return values[i] * (1.0 - w) + values[i + 1] * w;
    }
    int i, j; double wi, wj;
    locate(0, x[0], i, wi);
    locate(1, x[1], j, wj);
    auto at = [&](int a, int b) { return values[static_cast<std::size_t>(a) * n + b]; };
    return (1.0 - wi) * ((1.0 - wj) * at(i, j) + wj * at(i, j + 1)) +
           wi * ((1.0 - wj) * at(i + 1, j) + wj * at(i + 1, j + 1));
}

}  // namespace radner::economy
