// Copyright (c) 2026 the nsfstat authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "nsf/field.hpp"
#include "nsf/norms.hpp"
#include "nsf/stopping.hpp"

namespace nsf {

// Constitutive parameters (c_v, mu, eta, kappa).
struct Parameters {
    double c_v = 1.5;
    double mu = 0.1;
    double eta = 0.0;
    double kappa = 0.1;

    bool admissible() const { return c_v > 1.0 && mu > 0.0 && eta >= 0.0 && kappa > 0.0; }

    void validate() const {
        if (!admissible()) throw std::invalid_argument("Parameters: require c_v > 1, mu > 0, eta >= 0, kappa > 0");
    }
};

// Time-independent forcing (g, Q) with Q >= 0.
struct Forcing {
    VectorField g;
    ScalarField q;

    static Forcing zero(Grid grid) {
        return Forcing{VectorField::zero(grid), ScalarField::constant(grid, 0.0)};
    }

    void validate() const {
        if (q.min() < 0.0) throw std::invalid_argument("Forcing: Q must be nonnegative");
        if (!g.finite() || !q.finite()) throw NonFiniteField("Forcing: non-finite forcing fields");
    }
};

struct SolverConfig {
    double dt_init = 1e-3;
    double cfl = 0.4;           // in (0, 1]
    double dt_min = 1e-10;
    bool dealias = true;
    double dt_fixed = 0.0;      // > 0 forces a constant step (semigroup probes)
    bool record_states = false;

    void validate() const {
        if (dt_init <= 0.0) throw std::invalid_argument("SolverConfig: dt_init must be positive");
        if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("SolverConfig: cfl must lie in (0, 1]");
        if (!(dt_min < dt_init)) throw std::invalid_argument("SolverConfig: dt_min must be below dt_init");
    }
};

struct DiagnosticsRecord {
    double time = 0.0;
    double total_mass = 0.0;
    double total_energy = 0.0;
    double entropy = 0.0;
    double entropy_production_integral = 0.0;
    double min_rho = 0.0;
    double min_theta = 0.0;
    double max_rho_plus_theta = 0.0;
    double dt = 0.0;
    double div_u_sup = 0.0;  // feeds the lower-bound monitor
};

// ---- spatial operators of the NSF right-hand side ----

namespace detail {

inline ScalarField maybe_dealias(const ScalarField& f, bool enabled) {
    return enabled ? dealias(f) : f;
}

}  // namespace detail

// Pointwise viscous dissipation S(Du) : Du with
// S = mu (grad u + grad u^T - 2/3 div u I) + eta div u I. The deviatoric
// factor 2/3 is kept in every dimension.
inline ScalarField stress_dissipation(const State& state, const Parameters& p) {
    const Grid& g = state.grid();
    const int dim = g.dim;
    std::vector<std::vector<ScalarField>> grad_u(dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) grad_u[i].push_back(derivative(state.u[i], j, 1));
    std::vector<double> out(g.total_points(), 0.0);
    for (std::size_t k = 0; k < out.size(); ++k) {
        double div = 0.0;
        for (int i = 0; i < dim; ++i) div += grad_u[i][i][k];
        double dd = 0.0;  // |D|^2
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
                double d_ij = 0.5 * (grad_u[i][j][k] + grad_u[j][i][k]);
                dd += d_ij * d_ij;
            }
        out[k] = 2.0 * p.mu * dd + (p.eta - 2.0 / 3.0 * p.mu) * div * div;
    }
    return ScalarField(g, std::move(out));
}

// Right-hand side of the primitive-form system
//   d rho / dt   = -div(rho u)
//   d u / dt     = -(u.grad) u - (1/rho) grad(rho theta) + (1/rho) div S + g
//   d theta / dt = -u.grad theta + (S:Du + kappa lap theta)/(c_v rho)
//                  - theta div u / c_v + Q / c_v
// The theta equation is the exact rewrite of the internal-energy balance
// with e = c_v theta (see docs/theta_equation.md).
inline Tangent rhs(const State& state, const Parameters& params, const Forcing& forcing,
                   bool dealias_products = true) {
    if (!state.finite()) throw NonFiniteField("rhs: non-finite state");
    if (!state.in_x_plus()) throw NotInXPlus("rhs: state has non-positive density or temperature");
    const Grid& g = state.grid();
    const int dim = g.dim;
    auto P = [&](const ScalarField& f) { return detail::maybe_dealias(f, dealias_products); };

    std::vector<std::vector<ScalarField>> grad_u(dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) grad_u[i].push_back(derivative(state.u[i], j, 1));
    ScalarField divu = grad_u[0][0];
    for (int i = 1; i < dim; ++i) divu = divu + grad_u[i][i];

    ScalarField inv_rho = detail::map(state.rho, [](double v) { return 1.0 / v; });

    // continuity, conservative form
    ScalarField drho = ScalarField::constant(g, 0.0);
    for (int a = 0; a < dim; ++a) drho = drho - derivative(P(state.rho * state.u[a]), a, 1);

    // momentum in velocity form; div S closed for constant coefficients
    ScalarField pressure = P(state.rho * state.theta);
    ScalarField dissip = stress_dissipation(state, params);
    std::vector<ScalarField> du;
    for (int i = 0; i < dim; ++i) {
        ScalarField adv = P(state.u[0] * grad_u[i][0]);
        for (int j = 1; j < dim; ++j) adv = adv + P(state.u[j] * grad_u[i][j]);
        ScalarField div_s =
            params.mu * laplacian(state.u[i]) + (params.mu / 3.0 + params.eta) * derivative(divu, i, 1);
        du.push_back((-1.0) * adv - P(inv_rho * derivative(pressure, i, 1)) + P(inv_rho * div_s) +
                     forcing.g[i]);
    }

    // temperature form of the internal-energy balance
    ScalarField adv_t = P(state.u[0] * derivative(state.theta, 0, 1));
    for (int a = 1; a < dim; ++a) adv_t = adv_t + P(state.u[a] * derivative(state.theta, a, 1));
    ScalarField diffusion = P(inv_rho * (dissip + params.kappa * laplacian(state.theta)));
    ScalarField dtheta = (-1.0) * adv_t + (1.0 / params.c_v) * diffusion -
                         (1.0 / params.c_v) * P(state.theta * divu) + (1.0 / params.c_v) * forcing.q;

    return Tangent{std::move(drho), std::move(dtheta), std::move(du)};
}

// ---- integral diagnostics ----

struct ConservedQuantities {
    double mass = 0.0;
    double energy = 0.0;   // int (1/2 rho |u|^2 + c_v rho theta)
    double entropy = 0.0;  // int rho log(theta^{c_v} / rho)
};

inline ConservedQuantities diagnostics(const State& state, const Parameters& p) {
    if (!state.in_x_plus()) throw NotInXPlus("diagnostics: state outside X+");
    const Grid& g = state.grid();
    double mass = 0.0, energy = 0.0, entropy = 0.0;
    for (std::size_t k = 0; k < g.total_points(); ++k) {
        double rho = state.rho[k];
        double theta = state.theta[k];
        double u2 = 0.0;
        for (int d = 0; d < g.dim; ++d) u2 += state.u[d][k] * state.u[d][k];
        mass += rho;
        energy += 0.5 * rho * u2 + p.c_v * rho * theta;
        entropy += rho * (p.c_v * std::log(theta) - std::log(rho));
    }
    double w = g.cell_volume();
    return ConservedQuantities{mass * w, energy * w, entropy * w};
}

// int (1/theta) (S:Du + kappa |grad theta|^2 / theta); nonnegative up to
// round-off.
inline double entropy_production_rate(const State& state, const Parameters& p) {
    if (!state.in_x_plus()) throw NotInXPlus("entropy_production_rate: state outside X+");
    const Grid& g = state.grid();
    ScalarField dissip = stress_dissipation(state, p);
    std::vector<ScalarField> grad_t;
    for (int d = 0; d < g.dim; ++d) grad_t.push_back(derivative(state.theta, d, 1));
    double s = 0.0;
    for (std::size_t k = 0; k < g.total_points(); ++k) {
        double gt2 = 0.0;
        for (int d = 0; d < g.dim; ++d) gt2 += grad_t[d][k] * grad_t[d][k];
        double theta = state.theta[k];
        s += (dissip[k] + p.kappa * gt2 / theta) / theta;
    }
    return s * g.cell_volume();
}

// ---- time stepping ----

// Advective/acoustic and viscous step limits for the explicit RK4 scheme.
inline double cfl_dt(const State& state, const Parameters& p) {
    const Grid& g = state.grid();
    double dx = g.spacing();
    double vmax = state.u.sup_magnitude();
    double cmax = std::sqrt(state.theta.max() * (1.0 + 1.0 / p.c_v));
    double dt_adv = 0.9 * dx / (vmax + cmax);
    double rho_min = state.rho.min();
    double nu = std::max((4.0 / 3.0 * p.mu + p.eta) / rho_min, p.kappa / (p.c_v * rho_min));
    double dt_visc = 0.28 * dx * dx / nu;
    return std::min(dt_adv, dt_visc);
}

// One classical RK4 step; throws StepRejected if any stage or the result
// leaves X+.
inline State step(const State& state, double dt, const Parameters& params, const Forcing& forcing,
                  const SolverConfig& cfg = SolverConfig{}) {
    if (dt == 0.0) return state;
    auto guarded_rhs = [&](const State& s) {
        if (!s.finite()) throw StepRejected("step: non-finite stage");
        if (!s.in_x_plus()) throw StepRejected("step: stage left X+");
        return rhs(s, params, forcing, cfg.dealias);
    };
    Tangent k1 = guarded_rhs(state);
    Tangent k2 = guarded_rhs(axpy(state, 0.5 * dt, k1));
    Tangent k3 = guarded_rhs(axpy(state, 0.5 * dt, k2));
    Tangent k4 = guarded_rhs(axpy(state, dt, k3));
    State out = state;
    out = axpy(out, dt / 6.0, k1);
    out = axpy(out, dt / 3.0, k2);
    out = axpy(out, dt / 3.0, k3);
    out = axpy(out, dt / 6.0, k4);
    if (!out.finite() || !out.in_x_plus()) throw StepRejected("step: result left X+");
    return out;
}

enum class Termination { ReachedEnd, Stopped };

struct Trajectory {
    std::vector<DiagnosticsRecord> records;
    std::vector<State> states;  // filled when record_states is set (always includes t = 0)
    State final_state;
    double final_time = 0.0;
    Termination termination = Termination::ReachedEnd;
    StopReason stop_trigger = StopReason::None;  // record at which a stopping condition fired
    std::size_t trigger_index = 0;               // index into records of the trigger
};

namespace detail {

inline DiagnosticsRecord make_record(const State& s, const Parameters& p, double t, double dt,
                                     double production_integral) {
    DiagnosticsRecord r;
    r.time = t;
    ConservedQuantities c = diagnostics(s, p);
    r.total_mass = c.mass;
    r.total_energy = c.energy;
    r.entropy = c.entropy;
    r.entropy_production_integral = production_integral;
    r.min_rho = s.rho.min();
    r.min_theta = s.theta.min();
    std::size_t npts = s.grid().total_points();
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < npts; ++k) m = std::max(m, s.rho[k] + s.theta[k]);
    r.max_rho_plus_theta = m;
    r.dt = dt;
    r.div_u_sup = divergence(s.u).sup_norm();
    return r;
}

inline StopReason check_stop(const DiagnosticsRecord& r, const StoppingConfig& stop) {
    if (!std::isfinite(r.total_energy) || !std::isfinite(r.max_rho_plus_theta))
        return StopReason::NonFinite;
    if (r.max_rho_plus_theta >= stop.threshold_m) return StopReason::ThresholdM;
    if (r.min_rho < stop.rho_floor || r.min_theta < stop.theta_floor)
        return StopReason::PositivityLoss;
    return StopReason::None;
}

}  // namespace detail

// Advance the state to t_end with adaptive (CFL) or fixed time steps,
// recording diagnostics at every accepted step. If a stopping config is
// given, the run halts as soon as one of its conditions fires; mapping
// the halt to a stopping time is done by the extended-semigroup layer.
inline Trajectory solve(const State& state0, double t_end, const Parameters& params,
                        const Forcing& forcing, const SolverConfig& cfg,
                        const StoppingConfig* stop = nullptr) {
    params.validate();
    cfg.validate();
    if (!state0.in_x_plus()) throw NotInXPlus("solve: initial state outside X+");

    Trajectory traj;
    State state = state0;
    double t = 0.0;
    double production_integral = 0.0;
    double prev_rate = entropy_production_rate(state, params);
    long fixed_step_index = 0;

    traj.records.push_back(detail::make_record(state, params, 0.0, 0.0, 0.0));
    if (cfg.record_states) traj.states.push_back(state);

    auto finish = [&](Termination term, StopReason trig) {
        traj.final_state = state;
        traj.final_time = t;
        traj.termination = term;
        traj.stop_trigger = trig;
        traj.trigger_index = traj.records.size() - 1;
        return traj;
    };

    if (stop) {
        StopReason r0 = detail::check_stop(traj.records.front(), *stop);
        if (r0 != StopReason::None) return finish(Termination::Stopped, r0);
    }

    const double t_eps = 1e-12 * std::max(1.0, t_end);
    while (t < t_end - t_eps) {
        double dt;
        if (cfg.dt_fixed > 0.0) {
            dt = std::min(cfg.dt_fixed, t_end - t);
        } else {
            dt = std::min(cfg.cfl * cfl_dt(state, params), t_end - t);
            dt = std::min(dt, cfg.dt_init);
        }

        State next = state;
        bool accepted = false;
        while (!accepted) {
            double floor = stop ? std::max(stop->dt_min, cfg.dt_min) : cfg.dt_min;
            if (dt < floor) return finish(Termination::Stopped, StopReason::Stiffness);
            try {
                next = step(state, dt, params, forcing, cfg);
                accepted = true;
            } catch (const StepRejected&) {
                dt *= 0.5;
            }
        }

        state = next;
        if (cfg.dt_fixed > 0.0 && dt == cfg.dt_fixed) {
            ++fixed_step_index;
            t = fixed_step_index * cfg.dt_fixed;
        } else {
            t += dt;
        }

        double rate;
        try {
            rate = entropy_production_rate(state, params);
        } catch (const NotInXPlus&) {
            rate = prev_rate;
        }
        production_integral += 0.5 * dt * (prev_rate + rate);
        prev_rate = rate;

        traj.records.push_back(detail::make_record(state, params, t, dt, production_integral));
        if (cfg.record_states) traj.states.push_back(state);

        if (stop) {
            StopReason r = detail::check_stop(traj.records.back(), *stop);
            if (r != StopReason::None) return finish(Termination::Stopped, r);
        }
    }
    return finish(Termination::ReachedEnd, StopReason::None);
}

// ---- runtime positivity monitors ----

struct LowerBoundSeries {
    std::vector<double> times;
    std::vector<double> rho_floor;    // inf rho_0 * exp(-int ||div u||_inf)
    std::vector<double> theta_floor;  // inf theta_0 * exp(-(1/c_v) int ||div u||_inf)
    bool violated = false;            // observed minimum fell > 5% below its floor
};

inline LowerBoundSeries lower_bound_monitor(const Trajectory& traj, const Parameters& p) {
    LowerBoundSeries out;
    if (traj.records.empty()) return out;
    double rho0 = traj.records.front().min_rho;
    double theta0 = traj.records.front().min_theta;
    double integral = 0.0;
    for (std::size_t i = 0; i < traj.records.size(); ++i) {
        const auto& r = traj.records[i];
        if (i > 0) {
            const auto& prev = traj.records[i - 1];
            integral += 0.5 * (r.time - prev.time) * (prev.div_u_sup + r.div_u_sup);
        }
        double fr = rho0 * std::exp(-integral);
        double ft = theta0 * std::exp(-integral / p.c_v);
        out.times.push_back(r.time);
        out.rho_floor.push_back(fr);
        out.theta_floor.push_back(ft);
        if (r.min_rho < 0.95 * fr || r.min_theta < 0.95 * ft) out.violated = true;
    }
    return out;
}

}  // namespace nsf
