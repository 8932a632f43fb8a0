// SPDX-License-Identifier: MIT
#include "radner/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "radner/rng.hpp"

namespace radner::generator {

void eval_raw(const ZMatrix& z, std::span<const double> alphas, std::span<double> out) {
    const int agents = z.agents;
    const int d = z.dim;

    // u = sum_k alpha_k z_k
    thread_local std::vector<double> u;
    u.assign(d, 0.0);
    for (int k = 1; k <= agents; ++k) {
        const double* zk = z.row(k);
        const double a = alphas[k - 1];
        for (int j = 0; j < d; ++j) u[j] += a * zk[j];
    }

    const double* z0 = z.row(0);
    double f0 = 0.0;
    for (int j = 0; j < d; ++j) f0 -= (u[j] + z0[j]) * z0[j];
    out[0] = f0;

    const double n0 = norm(z.row_span(0));
    for (int i = 1; i <= agents; ++i) {
        const double* zi = z.row(i);
        double zi_sq = 0.0;
        for (int j = 0; j < d; ++j) zi_sq += zi[j] * zi[j];
        double value = -0.5 * zi_sq;
        if (n0 != 0.0) {
            double dir = 0.0;
            for (int j = 0; j < d; ++j) dir += (z0[j] + u[j] - zi[j]) * z0[j];
            dir /= n0;
            value += 0.5 * dir * dir;
        }
        out[i] = value;
    }
}

std::vector<double> eval_raw(const ZMatrix& z, std::span<const double> alphas) {
    std::vector<double> out(z.rows());
    eval_raw(z, alphas, out);
    return out;
}

ZMatrix truncate(const ZMatrix& z, double n) {
    const double mag = z.frobenius_norm();
    if (mag <= n) return z;
    ZMatrix out = z;
    const double scale = n / mag;
    for (double& v : out.data) v *= scale;
    return out;
}

double ramp(double r, double n) { return std::min(1.0, n * r); }

double spatial_cutoff(std::span<const double> x, double n) {
    const double r = norm(x) / n;
    if (r <= 1.0) return 1.0;
    if (r >= 2.0) return 0.0;
    const double s = r - 1.0;
    return 1.0 - s * s * (3.0 - 2.0 * s);
}

void eval_regularized(std::span<const double> x, const ZMatrix& z, RegularizationParams params,
                      std::span<const double> alphas, std::span<double> out) {
    if (!(params.n > 0.0)) throw std::invalid_argument("regularization parameter must be > 0");
    const ZMatrix zt = truncate(z, params.n);
    eval_raw(zt, alphas, out);
    const double factor =
        ramp(norm(z.row_span(0)), params.n) * spatial_cutoff(x, params.n);
    for (int i = 0; i < z.rows(); ++i) out[i] *= factor;
}

std::vector<double> eval_regularized(std::span<const double> x, const ZMatrix& z,
                                     RegularizationParams params,
                                     std::span<const double> alphas) {
    std::vector<double> out(z.rows());
    eval_regularized(x, z, params, alphas, out);
    return out;
}

ZMatrix grad_f0(const ZMatrix& z, std::span<const double> alphas) {
    const int agents = z.agents;
    const int d = z.dim;
    ZMatrix g(agents, d);

    const double* z0 = z.row(0);
    double* g0 = g.row(0);
    for (int k = 1; k <= agents; ++k) {
        const double* zk = z.row(k);
        const double a = alphas[k - 1];
        for (int j = 0; j < d; ++j) g0[j] -= a * zk[j];
    }
    for (int j = 0; j < d; ++j) g0[j] -= 2.0 * z0[j];

    for (int i = 1; i <= agents; ++i) {
        double* gi = g.row(i);
        const double a = alphas[i - 1];
        for (int j = 0; j < d; ++j) gi[j] = -a * z0[j];
    }
    return g;
}

SpanningVectors make_spanning_vectors(std::span<const double> alphas) {
    const int n = static_cast<int>(alphas.size()) + 1;  // I + 1
    SpanningVectors sv;
    for (int i = 0; i < n; ++i) {
        Vec v(n, 0.0);
        v[i] = -1.0;
        sv.vectors.push_back(std::move(v));
    }
    Vec last(n, 0.0);
    last[0] = 1.0;
    for (int i = 1; i < n; ++i) last[i] = alphas[i - 1];
    sv.vectors.push_back(std::move(last));
    return sv;
}

bool positively_spans_basis(const SpanningVectors& sv) {
    if (sv.vectors.empty()) return false;
    const int n = static_cast<int>(sv.vectors.front().size());
    const Vec& pos = sv.vectors.back();
    for (double c : pos)
        if (!(c > 0.0)) return false;

    // target = t * pos - sum_i mu_i e_i with t, mu_i >= 0 works whenever
    // pos has strictly positive entries; verify on +-e_j.
    for (int j = 0; j < n; ++j) {
        for (double sign : {1.0, -1.0}) {
            Vec target(n, 0.0);
            target[j] = sign;
            double t = 0.0;
            for (int i = 0; i < n; ++i) t = std::max(t, std::max(0.0, target[i]) / pos[i]);
            for (int i = 0; i < n; ++i) {
                const double mu = t * pos[i] - target[i];
                if (mu < -1e-12) return false;
            }
        }
    }
    return true;
}

namespace {

struct SampleScheme {
    std::span<const double> alphas;
    int dim;
    std::uint64_t seed;

    ZMatrix draw(std::int64_t index) const {
        const int agents = static_cast<int>(alphas.size());
        ZMatrix z(agents, dim);
        rng::Stream s(seed, static_cast<std::uint64_t>(index));
        const double mode = s.next_uniform();
        const double global_scale = std::pow(10.0, s.next_uniform(-3.0, 3.0));
        const bool per_row_scales = mode > 0.55;
        const bool zero_stock_row = mode < 0.10;
        for (int i = 0; i <= agents; ++i) {
            double scale = global_scale;
            if (per_row_scales) scale = std::pow(10.0, s.next_uniform(-3.0, 3.0));
            for (int j = 0; j < dim; ++j) z.row(i)[j] = scale * s.next_normal();
        }
        if (zero_stock_row)
            for (int j = 0; j < dim; ++j) z.row(0)[j] = 0.0;
        return z;
    }
};

}  // namespace

StructuralReport check_structural_conditions(std::span<const double> alphas, int dim,
                                             std::int64_t sample_count, std::uint64_t rng_seed) {
    if (sample_count < 1) throw std::invalid_argument("sample_count must be >= 1");
    const int agents = static_cast<int>(alphas.size());

    StructuralReport report;
    report.samples = sample_count;
    report.worst_dissipation_margin = -std::numeric_limits<double>::infinity();
    report.worst_agent_margin = -std::numeric_limits<double>::infinity();
    report.worst_gradient_margin = -std::numeric_limits<double>::infinity();

    std::vector<double> f(agents + 1), f_scaled(agents + 1);
    for (std::int64_t s = 0; s < sample_count; ++s) {
        SampleScheme scheme{alphas, dim, rng_seed};
        ZMatrix z = scheme.draw(s);
        const double z_frob = z.frobenius_norm();
        const double tol = 1e-10 * (1.0 + z_frob * z_frob);

        eval_raw(z, alphas, f);

        // (a) weighted dissipation
        double weighted = f[0];
        for (int i = 1; i <= agents; ++i) weighted += alphas[i - 1] * f[i];
        report.worst_dissipation_margin = std::max(report.worst_dissipation_margin, weighted);
        if (weighted > tol) {
            ++report.violations_dissipation;
            report.worst_witness = z;
        }

        // (b) agent lower bound
        for (int i = 1; i <= agents; ++i) {
            const double margin = -f[i] - 0.5 * norm_sq(z.row_span(i));
            report.worst_agent_margin = std::max(report.worst_agent_margin, margin);
            if (margin > tol) {
                ++report.violations_agent_bound;
                report.worst_witness = z;
            }
        }

        // (c) gradient bounds, magnitudes measured by sums of row norms
        const ZMatrix g = grad_f0(z, alphas);
        const double row_sum = z.row_norm_sum();
        const double z0_norm = norm(z.row_span(0));
        {
            const double margin0 = norm(g.row_span(0)) - 2.0 * row_sum;
            report.worst_gradient_margin = std::max(report.worst_gradient_margin, margin0);
            if (margin0 > tol) {
                ++report.violations_gradient;
                report.worst_witness = z;
            }
            for (int i = 1; i <= agents; ++i) {
                const double margin = norm(g.row_span(i)) - 2.0 * z0_norm;
                report.worst_gradient_margin = std::max(report.worst_gradient_margin, margin);
                if (margin > tol) {
                    ++report.violations_gradient;
                    report.worst_witness = z;
                }
            }
        }

        // (d) degree-2 positive homogeneity at lambda = 2 and lambda = 1.7;
        // the evaluation itself carries rounding of order eps * |z|^2, so
        // the deviation is measured relative to that scale
        for (const double lambda : {2.0, 1.7}) {
            ZMatrix zs = z;
            for (double& v : zs.data) v *= lambda;
            eval_raw(zs, alphas, f_scaled);
            const double scale = 1.0 + lambda * lambda * z_frob * z_frob;
            for (int i = 0; i <= agents; ++i) {
                const double expected = lambda * lambda * f[i];
                const double rel = std::fabs(f_scaled[i] - expected) / scale;
                report.worst_homogeneity_rel = std::max(report.worst_homogeneity_rel, rel);
                if (rel > 1e-12) {
                    ++report.violations_homogeneity;
                    report.worst_witness = z;
                }
            }
        }
    }
    return report;
}

}  // namespace radner::generator
