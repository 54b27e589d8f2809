// Copyright (c) 2026 the nsfstat authors
// SPDX-License-Identifier: Apache-2.0

// Shared manufactured-solution oracle for the solver tests.
//
// Smooth periodic 1D fields with geometric spectral decay. The source
// terms below were generated by symbolic differentiation of the governing
// equations applied to these fields (residual verified to vanish
// symbolically) and are frozen here as the oracle.
//   rho*   = 2 + (1/2)/(13/10 - cos(pi (x - t)))
//   u*     = (3/10) sin(pi (x + t/2))
//   theta* = 3/2 + (2/5)/(3/2 - sin(pi (x + t)))

#pragma once

#include <cmath>

#include "nsf/solver.hpp"

namespace mms {

inline double rho(double x, double t) { return 2.0 + 0.5 / (1.3 - std::cos(M_PI * (x - t))); }
inline double u(double x, double t) { return 0.3 * std::sin(M_PI * (x + 0.5 * t)); }
inline double theta(double x, double t) { return 1.5 + 0.4 / (1.5 - std::sin(M_PI * (x + t))); }

struct Sources {
    double s_rho, s_u, s_theta;
};

inline Sources sources(double x, double t, const nsf::Parameters& p) {
    const double cv = p.c_v, mu = p.mu, eta = p.eta, kappa = p.kappa;
    using std::cos;
    using std::pow;
    using std::sin;
    Sources s;
    s.s_rho =
        (1.0 / 10.0) * M_PI *
        (50 * (3 * sin(M_PI * ((1.0 / 2.0) * t + x)) - 10) * sin(M_PI * (t - x)) +
         3 * (-200 * pow(sin(M_PI * (t - x)), 2) - 570 * cos(M_PI * (t - x)) + 603) *
             cos(M_PI * ((1.0 / 2.0) * t + x))) /
        pow(10 * cos(M_PI * (t - x)) - 13, 2);
    s.s_u =
        (9.0 / 100.0) * M_PI * sin(M_PI * ((1.0 / 2.0) * t + x)) * cos(M_PI * ((1.0 / 2.0) * t + x)) +
        (3.0 / 20.0) * M_PI * cos(M_PI * ((1.0 / 2.0) * t + x)) +
        (3.0 / 10.0) * pow(M_PI, 2) * (eta + (4.0 / 3.0) * mu) * sin(M_PI * ((1.0 / 2.0) * t + x)) /
            (2 + (1.0 / 2.0) / (13.0 / 10.0 - cos(M_PI * (-t + x)))) +
        ((2.0 / 5.0) * M_PI * (2 + (1.0 / 2.0) / (13.0 / 10.0 - cos(M_PI * (-t + x)))) *
             cos(M_PI * (t + x)) / pow(3.0 / 2.0 - sin(M_PI * (t + x)), 2) -
         1.0 / 2.0 * M_PI * (3.0 / 2.0 + (2.0 / 5.0) / (3.0 / 2.0 - sin(M_PI * (t + x)))) *
             sin(M_PI * (-t + x)) / pow(13.0 / 10.0 - cos(M_PI * (-t + x)), 2)) /
            (2 + (1.0 / 2.0) / (13.0 / 10.0 - cos(M_PI * (-t + x))));
    s.s_theta =
        (3.0 / 25.0) * M_PI * sin(M_PI * ((1.0 / 2.0) * t + x)) * cos(M_PI * (t + x)) /
            pow(3.0 / 2.0 - sin(M_PI * (t + x)), 2) +
        (2.0 / 5.0) * M_PI * cos(M_PI * (t + x)) / pow(3.0 / 2.0 - sin(M_PI * (t + x)), 2) +
        (3.0 / 10.0) * M_PI * (3.0 / 2.0 + (2.0 / 5.0) / (3.0 / 2.0 - sin(M_PI * (t + x)))) *
            cos(M_PI * ((1.0 / 2.0) * t + x)) / cv -
        (-8.0 / 5.0 * pow(M_PI, 2) * kappa *
             (sin(M_PI * (t + x)) + 4 * pow(cos(M_PI * (t + x)), 2) / (2 * sin(M_PI * (t + x)) - 3)) /
             pow(2 * sin(M_PI * (t + x)) - 3, 2) +
         (9.0 / 100.0) * pow(M_PI, 2) * (eta + (4.0 / 3.0) * mu) *
             pow(cos(M_PI * ((1.0 / 2.0) * t + x)), 2)) /
            (cv * (2 + (1.0 / 2.0) / (13.0 / 10.0 - cos(M_PI * (-t + x)))));
    return s;
}

inline nsf::State state(const nsf::Grid& g, double t) {
    using nsf::ScalarField;
    return nsf::State{
        ScalarField::sample(g, [t](const std::array<double, 3>& x) { return rho(x[0], t); }),
        ScalarField::sample(g, [t](const std::array<double, 3>& x) { return theta(x[0], t); }),
        nsf::VectorField(std::vector<ScalarField>{
            ScalarField::sample(g, [t](const std::array<double, 3>& x) { return u(x[0], t); })})};
}

inline nsf::Tangent source_tangent(const nsf::Grid& g, double t, const nsf::Parameters& p) {
    using nsf::ScalarField;
    return nsf::Tangent{
        ScalarField::sample(g,
                            [&](const std::array<double, 3>& x) { return sources(x[0], t, p).s_rho; }),
        ScalarField::sample(
            g, [&](const std::array<double, 3>& x) { return sources(x[0], t, p).s_theta; }),
        {ScalarField::sample(
            g, [&](const std::array<double, 3>& x) { return sources(x[0], t, p).s_u; })}};
}

inline nsf::Tangent add(const nsf::Tangent& a, const nsf::Tangent& b) {
    std::vector<nsf::ScalarField> du;
    for (std::size_t d = 0; d < a.du.size(); ++d) du.push_back(a.du[d] + b.du[d]);
    return nsf::Tangent{a.drho + b.drho, a.dtheta + b.dtheta, std::move(du)};
}

// RK4 with the time-dependent manufactured sources added to the autonomous
// right-hand side; test-only plumbing.
inline nsf::State step(const nsf::State& s, double t, double dt, const nsf::Parameters& p,
                       const nsf::Forcing& zero) {
    const nsf::Grid& g = s.grid();
    auto f = [&](const nsf::State& y, double tau) {
        return add(nsf::rhs(y, p, zero, false), source_tangent(g, tau, p));
    };
    nsf::Tangent k1 = f(s, t);
    nsf::Tangent k2 = f(nsf::axpy(s, 0.5 * dt, k1), t + 0.5 * dt);
    nsf::Tangent k3 = f(nsf::axpy(s, 0.5 * dt, k2), t + 0.5 * dt);
    nsf::Tangent k4 = f(nsf::axpy(s, dt, k3), t + dt);
    nsf::State out = s;
    out = nsf::axpy(out, dt / 6.0, k1);
    out = nsf::axpy(out, dt / 3.0, k2);
    out = nsf::axpy(out, dt / 3.0, k3);
    out = nsf::axpy(out, dt / 6.0, k4);
    return out;
}

inline double sup_state_diff(const nsf::State& a, const nsf::State& b) {
    double m = (a.rho - b.rho).sup_norm();
    m = std::max(m, (a.theta - b.theta).sup_norm());
    for (int d = 0; d < a.grid().dim; ++d) m = std::max(m, (a.u[d] - b.u[d]).sup_norm());
    return m;
}

inline double track_error(int n, double t_end, double dt) {
    nsf::Grid g(1, n);
    nsf::Parameters p{1.5, 0.1, 0.05, 0.1};
    nsf::Forcing zero = nsf::Forcing::zero(g);
    nsf::State s = state(g, 0.0);
    long steps = std::lround(t_end / dt);
    for (long i = 0; i < steps; ++i) s = step(s, i * dt, dt, p, zero);
    return sup_state_diff(s, state(g, t_end));
}

}  // namespace mms
