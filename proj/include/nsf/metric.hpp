// Copyright (c) 2026 the nsfstat authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "nsf/extended.hpp"
#include "nsf/norms.hpp"

namespace nsf {

// Truncation and Sobolev exponent for the phase-space metric.
struct MetricConfig {
    int truncation_k = 8;  // |wavevector|_1 <= K
    double q = 6.0;

    void validate() const {
        if (truncation_k < 1) throw std::invalid_argument("MetricConfig: K must be >= 1");
        if (!(q > 3.0 && q <= 6.0)) throw std::invalid_argument("MetricConfig: q must lie in (3, 6]");
    }
};

// G(U) = (1 + ||U||_X + ||rho^{-1}||_C + ||theta^{-1}||_C)^{-2} on X+,
// 0 at U_inf and on states outside X+ (the limit value of the formula).
inline double G_weight(const ExtendedState& u, double q = 6.0) {
    if (u.is_infinity()) return 0.0;
    PhaseNorms n = sobolev_norm_X(u.state(), q);
    if (!n.in_x_plus()) return 0.0;
    double base = 1.0 + n.x_norm + n.inv_rho_sup + n.inv_theta_sup;
    return 1.0 / (base * base);
}

namespace detail {

// Weighted functionals Q_{i,k} evaluated on one extended state, in a
// fixed enumeration order. Index weight |k| = |wavevector|_1 + (c - 1)
// with component c in 1..dim+2 and a cosine/sine parity per wavevector.
struct MetricTerm {
    double weight;
    double value;
};

inline void enumerate_wavevectors(int dim, int k_max,
                                  const std::function<void(const std::array<int, 3>&, int)>& emit) {
    std::array<int, 3> m{0, 0, 0};
    if (dim == 1) {
        for (m[0] = -k_max; m[0] <= k_max; ++m[0]) emit(m, std::abs(m[0]));
    } else if (dim == 2) {
        for (m[0] = -k_max; m[0] <= k_max; ++m[0])
            for (m[1] = -k_max; m[1] <= k_max; ++m[1]) {
                int l1 = std::abs(m[0]) + std::abs(m[1]);
                if (l1 <= k_max) emit(m, l1);
            }
    } else {
        for (m[0] = -k_max; m[0] <= k_max; ++m[0])
            for (m[1] = -k_max; m[1] <= k_max; ++m[1])
                for (m[2] = -k_max; m[2] <= k_max; ++m[2]) {
                    int l1 = std::abs(m[0]) + std::abs(m[1]) + std::abs(m[2]);
                    if (l1 <= k_max) emit(m, l1);
                }
    }
}

inline std::vector<MetricTerm> metric_signature(const ExtendedState& u, int dim, int grid_n,
                                                const MetricConfig& cfg) {
    std::vector<MetricTerm> terms;
    double g = G_weight(u, cfg.q);
    // the i=1 term is k-independent; it enters once with weight 1
    terms.push_back(MetricTerm{1.0, g});
    enumerate_wavevectors(dim, cfg.truncation_k, [&](const std::array<int, 3>& m, int l1) {
        // wavevectors beyond the resolvable band contribute zero for every
        // state on this grid (they cancel in any same-grid distance)
        bool resolvable = true;
        for (int d = 0; d < dim; ++d)
            if (std::abs(m[d]) >= grid_n / 2) resolvable = false;
        for (int c = 1; c <= dim + 2; ++c) {
            double w = std::exp(-static_cast<double>(l1 + c - 1));
            if (u.is_infinity() || g == 0.0 || !resolvable) {
                terms.push_back(MetricTerm{w, 0.0});
                terms.push_back(MetricTerm{w, 0.0});
            } else {
                cplx f = fourier_coefficient(u.state(), c, m);
                terms.push_back(MetricTerm{w, g * f.real()});
                terms.push_back(MetricTerm{w, g * f.imag()});
            }
        }
    });
    return terms;
}

}  // namespace detail

// Metric on X+_inf: weighted sum of bounded differences of the
// functionals Q_{i,k}, truncated to |wavevector|_1 <= K.
inline double metric_d(const ExtendedState& a, const ExtendedState& b,
                       const MetricConfig& cfg = MetricConfig{}) {
    cfg.validate();
    if (a.is_infinity() && b.is_infinity()) return 0.0;
    if (!a.is_infinity() && !b.is_infinity() && a.state().grid() != b.state().grid())
        throw GridMismatch("metric_d: grids differ");
    const Grid& grid = (a.is_infinity() ? b : a).state().grid();
    auto ta = detail::metric_signature(a, grid.dim, grid.n, cfg);
    auto tb = detail::metric_signature(b, grid.dim, grid.n, cfg);
    double d = 0.0;
    for (std::size_t i = 0; i < ta.size(); ++i) {
        double diff = std::abs(ta[i].value - tb[i].value);
        d += ta[i].weight * diff / (1.0 + diff);
    }
    return d;
}

// Upper bound for |d_K - d_{K'}|, K < K': the total weight of terms
// present at truncation K' but not at K.
inline double truncation_tail_bound(int dim, int k_lo, int k_hi) {
    double tail = 0.0;
    detail::enumerate_wavevectors(dim, k_hi, [&](const std::array<int, 3>&, int l1) {
        if (l1 <= k_lo) return;
        for (int c = 1; c <= dim + 2; ++c) tail += 2.0 * std::exp(-static_cast<double>(l1 + c - 1));
    });
    return tail;
}

// ---- convergence classification (test-suite helper) ----

enum class ConvergenceMode { InXPlus, ToInfinity, NotConvergent };

inline ConvergenceMode convergence_mode(const std::vector<ExtendedState>& sequence,
                                        const ExtendedState& limit,
                                        const MetricConfig& cfg = MetricConfig{}) {
    if (sequence.empty()) return ConvergenceMode::NotConvergent;
    std::vector<double> d;
    for (const auto& u : sequence) d.push_back(metric_d(u, limit, cfg));
    std::size_t quarter = std::max<std::size_t>(1, d.size() / 4);
    double head = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < quarter; ++i) head = std::max(head, d[i]);
    for (std::size_t i = d.size() - quarter; i < d.size(); ++i) tail = std::max(tail, d[i]);
    bool converged = tail <= std::max(1e-9, 0.25 * head);
    if (!converged) return ConvergenceMode::NotConvergent;
    return limit.is_infinity() ? ConvergenceMode::ToInfinity : ConvergenceMode::InXPlus;
}

// ---- observables of class C ----

// Bounded continuous observable whose value converges to value(U_inf) as
// the phase norms blow up. The evaluator must handle U_inf itself.
struct Observable {
    std::function<double(const ExtendedState&)> eval;
    double bound = 1.0;

    double operator()(const ExtendedState& u) const { return eval(u); }
    double at_infinity() const { return eval(ExtendedState::infinity()); }
};

// Cutoff observable: C_n applied to Y = ||U||_X + ||rho^{-1}|| +
// ||theta^{-1}||, where C_n(Y) = Y for Y <= n and Y exp(-(Y - n))
// beyond, so the value decays to 0 (= the value at U_inf) as the norms
// blow up.
inline Observable make_cutoff_observable(double n, double q = 6.0) {
    if (n < 1.0) throw std::invalid_argument("make_cutoff_observable: n must be >= 1");
    auto eval = [n, q](const ExtendedState& u) -> double {
        if (u.is_infinity()) return 0.0;
        PhaseNorms norms = sobolev_norm_X(u.state(), q);
        if (!norms.in_x_plus()) return 0.0;
        double y = norms.x_norm + norms.inv_rho_sup + norms.inv_theta_sup;
        return y <= n ? y : y * std::exp(-(y - n));
    };
    return Observable{eval, n + 1.0};
}

// Windowed spectral moment: G(U) F_k(U) passed through the odd window
// B tanh(z / B); linear near zero and vanishing at U_inf.
inline Observable make_windowed_moment(int component, std::array<int, 3> wavevector, double window,
                                       bool imaginary_part = false, double q = 6.0) {
    if (window <= 0.0) throw std::invalid_argument("make_windowed_moment: window must be positive");
    auto eval = [=](const ExtendedState& u) -> double {
        if (u.is_infinity()) return 0.0;
        double g = G_weight(u, q);
        if (g == 0.0) return 0.0;
        cplx f = fourier_coefficient(u.state(), component, wavevector);
        double z = g * (imaginary_part ? f.imag() : f.real());
        return window * std::tanh(z / window);
    };
    return Observable{eval, window};
}

// ---- semigroup probe (lives on top of the metric) ----

// Metric distance between U(t+s) and U(t) applied after U(s). With
// fixed-dt stepping and aligned s this is exactly zero.
inline double semigroup_check(const ExtendedState& u0, const Forcing& forcing,
                              const Parameters& params, double s, double t,
                              const StoppingConfig& stop_cfg, const SolverConfig& solver_cfg,
                              const MetricConfig& metric_cfg = MetricConfig{}) {
    ExtendedState direct = evolve_extended(u0, params, forcing, s + t, stop_cfg, solver_cfg);
    ExtendedState half = evolve_extended(u0, params, forcing, s, stop_cfg, solver_cfg);
    ExtendedState composed = evolve_extended(half, params, forcing, t, stop_cfg, solver_cfg);
    return metric_d(direct, composed, metric_cfg);
}

}  // namespace nsf
