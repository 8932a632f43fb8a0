// SPDX-License-Identifier: MIT
//
// Equilibrium quantities derived from a solved field: the stock volatility
// row zeta = grad(v_0) sigma, agents' volatility rows gamma_i, positions
//
//   theta_i = 1 + (sum_k alpha_k gamma_k - gamma_i) . zeta / |zeta|^2,
//
// the instantaneous drift (sum_k alpha_k gamma_k + zeta) . zeta, and their
// unscaled counterparts. Where |zeta| falls below eps_nodal the position
// formula degenerates; theta_i = 1 there, which clears the market exactly.
#pragma once

#include <vector>

#include "radner/economy.hpp"
#include "radner/pde_solver.hpp"

namespace radner::equilibrium {

struct PointQuantities {
    Vec zeta;        // d
    RowMat gammas;   // I x d
    Vec thetas;      // I (scaled positions)
    double drift_mu = 0.0;
    double premium_unscaled = 0.0;
    double total_vol_unscaled = 0.0;
    bool zeta_zero = false;
};

/// Scaled instantaneous drift of the stock equation.
double drift(std::span<const double> zeta, const RowMat& gammas, std::span<const double> alphas);

/// Positions from the volatility rows; gammas has one row per agent.
Vec thetas_from(std::span<const double> zeta, const RowMat& gammas,
                std::span<const double> alphas, double eps_nodal);

PointQuantities derive_point(std::span<const double> zeta, const RowMat& gammas,
                             std::span<const double> alphas, double sum_delta, double eps_nodal);

struct EquilibriumSlice {
    int nodes = 0, agents = 0, dim = 0;
    std::vector<double> zeta;      // nodes x d
    std::vector<double> gammas;    // nodes x I x d
    std::vector<double> thetas;    // nodes x I
    Vec drift_mu;                  // nodes
    Vec premium_unscaled;          // nodes
    Vec total_vol_unscaled;        // nodes
    std::vector<char> zeta_zero;   // nodes

    std::span<const double> zeta_at(int node) const {
        return {zeta.data() + static_cast<std::size_t>(node) * dim,
                static_cast<std::size_t>(dim)};
    }
    std::span<const double> thetas_at(int node) const {
        return {thetas.data() + static_cast<std::size_t>(node) * agents,
                static_cast<std::size_t>(agents)};
    }
};

/// Lazy view over a solution field: slices are derived on request (nothing
/// is cached, so concurrent readers are safe).
class EquilibriumField {
public:
    EquilibriumField(const pde::SolutionField& field, economy::ScaledEconomy econ,
                     double eps_nodal = 1e-8);

    EquilibriumSlice slice(int time_index) const;

    /// theta_i at an exact grid point of a given time slice.
    PointQuantities at_node(int time_index, int node) const;

    /// Max of |sum_i alpha_i theta_i - 1| over all slices and nodes where
    /// the position formula applies (fallback nodes clear exactly).
    double max_clearing_violation() const;

    double eps_nodal() const { return eps_nodal_; }
    const economy::ScaledEconomy& econ() const { return econ_; }
    const pde::SolutionField& field() const { return *field_; }

private:
    const pde::SolutionField* field_;
    economy::ScaledEconomy econ_;
    double eps_nodal_;
};

struct UnscaledSummary {
    double premium = 0.0;
    double total_vol = 0.0;
    Vec positions;  // unscaled holdings alpha_i * theta_i
};

/// Summary at an on-grid point (t must be a slice time, x a grid node).
UnscaledSummary unscaled_summary(const EquilibriumField& eq, double t, std::span<const double> x);

/// Cell-weighted fraction of (time, node) pairs with |grad v_0| < eps.
double nodal_set_fraction(const pde::SolutionField& field, double eps);

}  // namespace radner::equilibrium
