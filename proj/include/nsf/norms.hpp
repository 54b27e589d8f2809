// Copyright (c) 2026 the nsfstat authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "nsf/field.hpp"

namespace nsf {

// Norm data defining membership in the phase space X and its subset X+.
struct PhaseNorms {
    double x_norm = 0.0;        // ||rho||_{W^{1,q}} + ||theta||_{W^{2,2}} + ||u||_{W^{2,2}}
    double inv_rho_sup = 0.0;   // 1 / min(rho), +inf outside X+
    double inv_theta_sup = 0.0; // 1 / min(theta), +inf outside X+

    bool in_x_plus() const {
        return std::isfinite(inv_rho_sup) && std::isfinite(inv_theta_sup);
    }
};

// L^q norm by midpoint quadrature on the grid samples.
inline double lq_norm(const ScalarField& f, double q) {
    double s = 0.0;
    for (double v : f.values()) s += std::pow(std::abs(v), q);
    return std::pow(f.grid().cell_volume() * s, 1.0 / q);
}

inline double l2_norm(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values()) s += v * v;
    return std::sqrt(f.grid().cell_volume() * s);
}

// quadrature of the field over the torus
inline double integral(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values()) s += v;
    return f.grid().cell_volume() * s;
}

namespace detail {

// all partial derivatives of exact order 1 resp. 2 (mixed included once)
inline std::vector<ScalarField> order_one(const ScalarField& f) {
    std::vector<ScalarField> out;
    for (int a = 0; a < f.grid().dim; ++a) out.push_back(derivative(f, a, 1));
    return out;
}

inline std::vector<ScalarField> order_two(const ScalarField& f) {
    std::vector<ScalarField> out;
    for (int a = 0; a < f.grid().dim; ++a)
        for (int b = a; b < f.grid().dim; ++b)
            out.push_back(a == b ? derivative(f, a, 2) : derivative(derivative(f, a, 1), b, 1));
    return out;
}

}  // namespace detail

// W^{1,q} norm as the q-sum over multi-indices |alpha| <= 1.
inline double w1q_norm(const ScalarField& f, double q) {
    double s = std::pow(lq_norm(f, q), q);
    for (const auto& d : detail::order_one(f)) s += std::pow(lq_norm(d, q), q);
    return std::pow(s, 1.0 / q);
}

// W^{2,2} norm as the 2-sum over multi-indices |alpha| <= 2.
inline double w22_norm(const ScalarField& f) {
    double s = std::pow(l2_norm(f), 2);
    for (const auto& d : detail::order_one(f)) s += std::pow(l2_norm(d), 2);
    for (const auto& d : detail::order_two(f)) s += std::pow(l2_norm(d), 2);
    return std::sqrt(s);
}

// Norms of the phase space X = W^{1,q} x W^{2,2} x W^{2,2} together with
// the sup norms of the reciprocals of rho and theta. Reciprocal sups are
// +inf when the minimum is not strictly positive; that is a valid result
// signalling U outside X+, not an error.
inline PhaseNorms sobolev_norm_X(const State& state, double q = 6.0) {
    if (!(q > 3.0 && q <= 6.0)) throw std::invalid_argument("sobolev_norm_X: q must lie in (3, 6]");
    PhaseNorms n;
    // ||u||_{W^{2,2}(T^dim; R^dim)}: 2-sum over components
    double usq = 0.0;
    for (int d = 0; d < state.grid().dim; ++d) usq += std::pow(w22_norm(state.u[d]), 2);
    n.x_norm = w1q_norm(state.rho, q) + w22_norm(state.theta) + std::sqrt(usq);
    const double inf = std::numeric_limits<double>::infinity();
    double rmin = state.rho.min();
    double tmin = state.theta.min();
    n.inv_rho_sup = rmin > 0.0 ? 1.0 / rmin : inf;
    n.inv_theta_sup = tmin > 0.0 ? 1.0 / tmin : inf;
    return n;
}

// Fourier functional F_k of the state: the coefficient of the selected
// component (1 = rho, 2 = theta, 3.. = velocity components) against the
// L2-normalized mode with the given wavevector.
inline cplx fourier_coefficient(const State& state, int component,
                                const std::array<int, 3>& wavevector) {
    const Grid& g = state.grid();
    if (component < 1 || component > g.dim + 2)
        throw std::invalid_argument("fourier_coefficient: component out of range");
    std::array<int, 3> idx{0, 0, 0};
    for (int d = 0; d < g.dim; ++d) {
        int m = wavevector[d];
        if (std::abs(m) >= g.n / 2) throw OutOfBand("fourier_coefficient: wavevector not resolvable");
        idx[d] = m >= 0 ? m : m + g.n;
    }
    const ScalarField& f = component == 1   ? state.rho
                           : component == 2 ? state.theta
                                            : state.u[component - 3];
    return f.spectrum()[g.flatten(idx)];
}

}  // namespace nsf
