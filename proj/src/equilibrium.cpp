// SPDX-License-Identifier: MIT
#include "radner/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace radner::equilibrium {

double drift(std::span<const double> zeta, const RowMat& gammas, std::span<const double> alphas) {
    const int d = static_cast<int>(zeta.size());
    double mu = 0.0;
    for (int j = 0; j < d; ++j) {
        double w = zeta[j];
        for (int i = 0; i < gammas.rows; ++i) w += alphas[i] * gammas.at(i, j);
        mu += w * zeta[j];
    }
    return mu;
}

Vec thetas_from(std::span<const double> zeta, const RowMat& gammas,
                std::span<const double> alphas, double eps_nodal) {
    const int agents = gammas.rows;
    const int d = static_cast<int>(zeta.size());
    Vec thetas(agents, 1.0);
    const double zeta_norm = norm(zeta);
    if (zeta_norm < eps_nodal) return thetas;  // fallback: clears exactly

    const double inv_sq = 1.0 / (zeta_norm * zeta_norm);
    Vec avg(d, 0.0);
    for (int i = 0; i < agents; ++i)
        for (int j = 0; j < d; ++j) avg[j] += alphas[i] * gammas.at(i, j);
    for (int i = 0; i < agents; ++i) {
        double num = 0.0;
        for (int j = 0; j < d; ++j) num += (avg[j] - gammas.at(i, j)) * zeta[j];
        thetas[i] = 1.0 + num * inv_sq;
    }
    return thetas;
}

PointQuantities derive_point(std::span<const double> zeta, const RowMat& gammas,
                             std::span<const double> alphas, double sum_delta, double eps_nodal) {
    PointQuantities q;
    q.zeta.assign(zeta.begin(), zeta.end());
    q.gammas = gammas;
    q.thetas = thetas_from(zeta, gammas, alphas, eps_nodal);
    q.drift_mu = drift(zeta, gammas, alphas);
    q.premium_unscaled = sum_delta * q.drift_mu;
    q.total_vol_unscaled = sum_delta * norm(zeta);
    q.zeta_zero = norm(zeta) < eps_nodal;
    return q;
}

EquilibriumField::EquilibriumField(const pde::SolutionField& field, economy::ScaledEconomy econ,
                                   double eps_nodal)
    : field_(&field), econ_(std::move(econ)), eps_nodal_(eps_nodal) {}

EquilibriumSlice EquilibriumField::slice(int k) const {
    const pde::Grid& grid = field_->grid;
    const int d = grid.dim;
    const int agents = econ_.num_agents();
    const int components = agents + 1;
    const int nodes = grid.num_nodes();
    const double t = grid.time_at(k);

    EquilibriumSlice out;
    out.nodes = nodes;
    out.agents = agents;
    out.dim = d;
    out.zeta.resize(static_cast<std::size_t>(nodes) * d);
    out.gammas.resize(static_cast<std::size_t>(nodes) * agents * d);
    out.thetas.resize(static_cast<std::size_t>(nodes) * agents);
    out.drift_mu.resize(nodes);
    out.premium_unscaled.resize(nodes);
    out.total_vol_unscaled.resize(nodes);
    out.zeta_zero.resize(nodes);

    const std::vector<double> grad = field_->gradient_slice(k);
    RowMat sigma(d, d);
    RowMat gammas(agents, d);
    for (int node = 0; node < nodes; ++node) {
        double xbuf[2];
        std::span<double> x(xbuf, static_cast<std::size_t>(d));
        grid.node_coords(node, x);
        econ_.model.vol(t, x, sigma.data);

        // Z rows = gradient rows times sigma.
        const double* g = grad.data() + static_cast<std::size_t>(node) * components * d;
        for (int l = 0; l < d; ++l) {
            double acc = 0.0;
            for (int j = 0; j < d; ++j) acc += g[j] * sigma.at(j, l);
            out.zeta[static_cast<std::size_t>(node) * d + l] = acc;
        }
        for (int i = 0; i < agents; ++i)
            for (int l = 0; l < d; ++l) {
                double acc = 0.0;
                for (int j = 0; j < d; ++j) acc += g[(i + 1) * d + j] * sigma.at(j, l);
                gammas.at(i, l) = acc;
            }

        const std::span<const double> zeta = out.zeta_at(node);
        const Vec thetas = thetas_from(zeta, gammas, econ_.alphas, eps_nodal_);
        for (int i = 0; i < agents; ++i) {
            out.thetas[static_cast<std::size_t>(node) * agents + i] = thetas[i];
            for (int l = 0; l < d; ++l)
                out.gammas[(static_cast<std::size_t>(node) * agents + i) * d + l] =
                    gammas.at(i, l);
        }
        out.drift_mu[node] = drift(zeta, gammas, econ_.alphas);
        out.premium_unscaled[node] = econ_.sum_delta * out.drift_mu[node];
        const double zeta_norm = norm(zeta);
        out.total_vol_unscaled[node] = econ_.sum_delta * zeta_norm;
        out.zeta_zero[node] = zeta_norm < eps_nodal_ ? 1 : 0;
    }
    return out;
}

PointQuantities EquilibriumField::at_node(int k, int node) const {
    const EquilibriumSlice s = slice(k);
    PointQuantities q;
    q.zeta.assign(s.zeta_at(node).begin(), s.zeta_at(node).end());
    q.gammas = RowMat(s.agents, s.dim);
    for (int i = 0; i < s.agents; ++i)
        for (int l = 0; l < s.dim; ++l)
            q.gammas.at(i, l) = s.gammas[(static_cast<std::size_t>(node) * s.agents + i) * s.dim + l];
    const auto th = s.thetas_at(node);
    q.thetas.assign(th.begin(), th.end());
    q.drift_mu = s.drift_mu[node];
    q.premium_unscaled = s.premium_unscaled[node];
    q.total_vol_unscaled = s.total_vol_unscaled[node];
    q.zeta_zero = s.zeta_zero[node] != 0;
    return q;
}

double EquilibriumField::max_clearing_violation() const {
    double worst = 0.0;
    const int agents = econ_.num_agents();
    for (int k = 0; k <= field_->grid.time_steps; ++k) {
        const EquilibriumSlice s = slice(k);
        for (int node = 0; node < s.nodes; ++node) {
            if (s.zeta_zero[node]) continue;
            double total = 0.0;
            for (int i = 0; i < agents; ++i)
                total += econ_.alphas[i] * s.thetas[static_cast<std::size_t>(node) * agents + i];
            worst = std::max(worst, std::fabs(total - 1.0));
        }
    }
    return worst;
}

UnscaledSummary unscaled_summary(const EquilibriumField& eq, double t, std::span<const double> x) {
    const pde::Grid& grid = eq.field().grid;
    const double kf = t * grid.time_steps;
    const int k = static_cast<int>(std::lround(kf));
    if (std::fabs(kf - k) > 1e-9 || k < 0 || k > grid.time_steps)
        throw std::invalid_argument("unscaled_summary: t is not a slice time");
    const int node = grid.nearest_node(x);
    double xbuf[2];
    std::span<double> xn(xbuf, static_cast<std::size_t>(grid.dim));
    grid.node_coords(node, xn);
    for (int a = 0; a < grid.dim; ++a)
        if (std::fabs(xn[a] - x[a]) > 1e-9 * (1.0 + std::fabs(x[a])))
            throw std::invalid_argument("unscaled_summary: x is not a grid node");

    const PointQuantities q = eq.at_node(k, node);
    UnscaledSummary s;
    s.premium = q.premium_unscaled;
    s.total_vol = q.total_vol_unscaled;
    s.positions.resize(q.thetas.size());
    for (std::size_t i = 0; i < q.thetas.size(); ++i)
        s.positions[i] = eq.econ().alphas[i] * q.thetas[i];
    return s;
}

double nodal_set_fraction(const pde::SolutionField& field, double eps) {
    const pde::Grid& grid = field.grid;
    const int nodes = grid.num_nodes();
    const int d = grid.dim;
    const int components = field.components;

    auto axis_weight = [&](int pos) {
        return (pos == 0 || pos == grid.nodes_per_axis - 1) ? 0.5 : 1.0;
    };

    double hits = 0.0, total = 0.0;
    for (int k = 0; k <= grid.time_steps; ++k) {
        const double tw = (k == 0 || k == grid.time_steps) ? 0.5 : 1.0;
        const std::vector<double> grad = field.gradient_slice(k);
        for (int node = 0; node < nodes; ++node) {
            double w = tw;
            if (d == 1) {
                w *= axis_weight(node);
            } else {
                w *= axis_weight(node / grid.nodes_per_axis) *
                     axis_weight(node % grid.nodes_per_axis);
            }
            const double* g0 = grad.data() + static_cast<std::size_t>(node) * components * d;
            const double mag = norm(std::span<const double>(g0, static_cast<std::size_t>(d)));
            total += w;
            if (mag < eps) hits += w;
        }
    }
    return hits / total;
}

}  // namespace radner::equilibrium
