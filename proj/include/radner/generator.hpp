// SPDX-License-Identifier: MIT
//
// The equilibrium driver f of the backward system and its Lipschitz
// regularization. Component 0 drives the stock-price equation, components
// 1..I the agents' certainty-equivalent equations:
//
//   f_0(z) = -(sum_k alpha_k z_k + z_0) . z_0
//   f_i(z) = 1/2 ((z_0 + sum_k alpha_k z_k - z_i) . z_0 / |z_0|)^2 [z_0 != 0]
//            - 1/2 |z_i|^2
//
// f_i is discontinuous across {|z_0| = 0}; the regularized family
//   f_n(x, z) = f(trunc_n(z)) * ramp_n(|z_0|) * cutoff_n(x)
// is globally Lipschitz for each n and is what the PDE stepper consumes.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "radner/linalg.hpp"

namespace radner::generator {

/// Volatility matrix of the system: row 0 is the stock slot, rows 1..I the
/// agent slots, each a d-vector.
struct ZMatrix {
    int agents = 0;  // I
    int dim = 0;     // d
    std::vector<double> data;  // (I+1) x d, row-major

    ZMatrix() = default;
    ZMatrix(int agents_, int dim_)
        : agents(agents_), dim(dim_),
          data(static_cast<std::size_t>(agents_ + 1) * dim_, 0.0) {}

    int rows() const { return agents + 1; }
    double& at(int i, int j) { return data[static_cast<std::size_t>(i) * dim + j]; }
    double at(int i, int j) const { return data[static_cast<std::size_t>(i) * dim + j]; }
    double* row(int i) { return data.data() + static_cast<std::size_t>(i) * dim; }
    const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * dim; }
    std::span<const double> row_span(int i) const { return {row(i), static_cast<std::size_t>(dim)}; }
    std::span<double> row_span(int i) { return {row(i), static_cast<std::size_t>(dim)}; }

    double frobenius_norm() const { return norm(data); }
    /// Sum of row norms; the magnitude the gradient bounds are stated in.
    double row_norm_sum() const {
        double s = 0.0;
        for (int i = 0; i <= agents; ++i) s += norm(row_span(i));
        return s;
    }
};

struct RegularizationParams {
    double n = 0.0;  // single parameter driving truncation, ramp and cutoff
};

/// Raw driver, evaluated with the exact |z_0| == 0 test. Writes I+1 values.
void eval_raw(const ZMatrix& z, std::span<const double> alphas, std::span<double> out);
std::vector<double> eval_raw(const ZMatrix& z, std::span<const double> alphas);

/// Regularized driver f_n(x, z); Lipschitz in (x, z) for fixed n > 0 and
/// equal to the raw driver whenever |z|_F <= n, |z_0| >= 1/n and |x| <= n.
void eval_regularized(std::span<const double> x, const ZMatrix& z, RegularizationParams params,
                      std::span<const double> alphas, std::span<double> out);
std::vector<double> eval_regularized(std::span<const double> x, const ZMatrix& z,
                                     RegularizationParams params, std::span<const double> alphas);

/// Analytic Jacobian of f_0: row 0 is -(sum_k alpha_k z_k + 2 z_0), row i
/// (i >= 1) is -alpha_i z_0.
ZMatrix grad_f0(const ZMatrix& z, std::span<const double> alphas);

/// Norm truncation trunc_n(z) = (|z| ^ n)(z / |z|), identity at z = 0.
ZMatrix truncate(const ZMatrix& z, double n);

/// Ramp min(1, n r): kills the discontinuity as |z_0| -> 0.
double ramp(double r, double n);

/// C^1 spatial cutoff: 1 on |x| <= n, 0 on |x| >= 2n, cubic in between.
double spatial_cutoff(std::span<const double> x, double n);

/// The I+2 vectors that positively span R^{I+1} for this driver:
/// -e_1, ..., -e_{I+1} and (1, alpha_1, ..., alpha_I).
struct SpanningVectors {
    std::vector<Vec> vectors;  // each of length I+1
};

SpanningVectors make_spanning_vectors(std::span<const double> alphas);

/// True if every +-e_j is a nonnegative combination of the vectors
/// (constructively, using the one strictly positive vector in the set).
bool positively_spans_basis(const SpanningVectors& sv);

/// Randomized verification of the driver's structural inequalities:
///   (a) f_0 + sum_i alpha_i f_i <= 0
///   (b) -f_i <= |z_i|^2 / 2 for i >= 1
///   (c) |grad_f0 row 0| <= 2 * (sum of row norms of z),
///       |grad_f0 row i| <= 2 |z_0|
///   (d) f(lambda z) = lambda^2 f(z) for lambda > 0
/// over `sample_count` draws mixing scales 1e-3..1e3 (per-matrix and
/// per-row) and exact z_0 = 0 cases.
struct StructuralReport {
    std::int64_t samples = 0;
    std::int64_t violations_dissipation = 0;   // (a)
    std::int64_t violations_agent_bound = 0;   // (b)
    std::int64_t violations_gradient = 0;      // (c)
    std::int64_t violations_homogeneity = 0;   // (d)
    double worst_dissipation_margin = 0.0;     // max of lhs (should be <= 0)
    double worst_agent_margin = 0.0;
    double worst_gradient_margin = 0.0;
    double worst_homogeneity_rel = 0.0;
    ZMatrix worst_witness;

    std::int64_t total_violations() const {
        return violations_dissipation + violations_agent_bound + violations_gradient +
               violations_homogeneity;
    }
};

StructuralReport check_structural_conditions(std::span<const double> alphas, int dim,
                                             std::int64_t sample_count, std::uint64_t rng_seed);

}  // namespace radner::generator
