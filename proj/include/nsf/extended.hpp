// Copyright (c) 2026 the nsfstat authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "nsf/solver.hpp"
#include "nsf/stopping.hpp"

namespace nsf {

// A point of X+_inf: either a regular state in X+ or the absorbing point
// U_inf = (0,0,0), which carries no field data.
class ExtendedState {
  public:
    static ExtendedState infinity() { return ExtendedState{}; }
    static ExtendedState regular(State s) {
        ExtendedState e;
        e.state_ = std::move(s);
        return e;
    }

    bool is_infinity() const { return !state_.has_value(); }
    const State& state() const { return *state_; }

  private:
    std::optional<State> state_;
};

// Evaluate the stopping record of a computed trajectory against a
// stopping config (which may differ from the one used during the run,
// e.g. for sweeps in M over a single trajectory).
//
// Detection is discrete: the first record at which a condition holds. The
// continuous stopping time lies between that record and the previous one;
// the earlier bracket time is reported (conservative censoring).
inline StoppingRecord stopping_time(const Trajectory& traj, const StoppingConfig& config) {
    config.validate();
    StoppingRecord rec;
    for (std::size_t i = 0; i < traj.records.size(); ++i) {
        const auto& r = traj.records[i];
        rec.peak_value = std::max(rec.peak_value, r.max_rho_plus_theta);
        StopReason reason = detail::check_stop(r, config);
        if (reason != StopReason::None) {
            rec.reason = reason;
            rec.t_stop = i > 0 ? traj.records[i - 1].time : 0.0;
            return rec;
        }
    }
    if (traj.stop_trigger == StopReason::Stiffness) {
        rec.reason = StopReason::Stiffness;
        std::size_t i = traj.trigger_index;
        rec.t_stop = i > 0 ? traj.records[i - 1].time : 0.0;
    }
    return rec;
}

// Extended solution operator: evolve the state to time t, absorbing into
// U_inf at the stopping time. Every failure mode (threshold, positivity
// loss, stiffness, non-finite values) maps to U_inf.
inline ExtendedState evolve_extended(const ExtendedState& data, const Parameters& params,
                                     const Forcing& forcing, double t,
                                     const StoppingConfig& stop_cfg,
                                     const SolverConfig& solver_cfg) {
    if (data.is_infinity()) return ExtendedState::infinity();
    Trajectory traj;
    try {
        traj = solve(data.state(), t, params, forcing, solver_cfg, &stop_cfg);
    } catch (const NonFiniteField&) {
        return ExtendedState::infinity();
    }
    StoppingRecord rec = stopping_time(traj, stop_cfg);
    if (rec.triggered()) return ExtendedState::infinity();
    return ExtendedState::regular(traj.final_state);
}

// One censored trajectory sampled at query times.
struct ExtendedPath {
    std::vector<ExtendedState> at_times;
    StoppingRecord stopping;  // t_stop measured from the launch time
};

// March a state through sorted query times, censoring at the first
// stopping trigger. Absorption is permanent.
inline ExtendedPath evolve_at_times(const State& state0, const std::vector<double>& times,
                                    const Parameters& params, const Forcing& forcing,
                                    const StoppingConfig& stop_cfg, const SolverConfig& solver_cfg) {
    ExtendedPath path;
    State current = state0;
    double t_prev = 0.0;
    bool absorbed = false;
    for (double t : times) {
        if (t < t_prev) throw std::invalid_argument("evolve_at_times: times must be sorted");
        if (absorbed) {
            path.at_times.push_back(ExtendedState::infinity());
            continue;
        }
        bool failed = false;
        Trajectory traj;
        try {
            traj = solve(current, t - t_prev, params, forcing, solver_cfg, &stop_cfg);
        } catch (const NonFiniteField&) {
            failed = true;
        }
        if (!failed) {
            StoppingRecord rec = stopping_time(traj, stop_cfg);
            if (rec.triggered()) {
                absorbed = true;
                path.stopping = rec;
                path.stopping.t_stop = t_prev + rec.t_stop;
            } else {
                current = traj.final_state;
            }
        } else {
            absorbed = true;
            path.stopping.reason = StopReason::NonFinite;
            path.stopping.t_stop = t_prev;
        }
        path.at_times.push_back(absorbed ? ExtendedState::infinity()
                                         : ExtendedState::regular(current));
        t_prev = t;
    }
    return path;
}

// ---- stability probe ----

struct StabilityEntry {
    double delta = 0.0;
    double sup_difference = 0.0;  // +inf when the perturbed run was absorbed before t
};

struct StabilityReport {
    std::vector<StabilityEntry> entries;
    double fitted_order = 0.0;  // log-log least-squares slope over finite entries
};

namespace detail {

// fixed smooth perturbation profile: lowest cosine mode in every field
inline State perturb(const State& s, double delta) {
    const Grid& g = s.grid();
    ScalarField bump = ScalarField::sample(
        g, [](const std::array<double, 3>& x) { return std::cos(M_PI * x[0]); });
    std::vector<ScalarField> u;
    for (int d = 0; d < g.dim; ++d) u.push_back(s.u[d] + delta * bump);
    return State{s.rho + delta * bump, s.theta + delta * bump, VectorField(std::move(u))};
}

inline double sup_difference(const State& a, const State& b) {
    double m = (a.rho - b.rho).sup_norm();
    m = std::max(m, (a.theta - b.theta).sup_norm());
    for (int d = 0; d < a.grid().dim; ++d) m = std::max(m, (a.u[d] - b.u[d]).sup_norm());
    return m;
}

}  // namespace detail

// Perturb the initial state by a fixed smooth profile scaled by each
// delta, evolve both runs to time t, and report sup-norm differences.
inline StabilityReport stability_probe(const State& state0, const Parameters& params,
                                       const Forcing& forcing, const std::vector<double>& deltas,
                                       double t, const StoppingConfig& stop_cfg,
                                       const SolverConfig& solver_cfg) {
    ExtendedState base =
        evolve_extended(ExtendedState::regular(state0), params, forcing, t, stop_cfg, solver_cfg);
    if (base.is_infinity())
        throw std::invalid_argument("stability_probe: unperturbed run stops before t");
    StabilityReport report;
    for (double delta : deltas) {
        ExtendedState pert = evolve_extended(ExtendedState::regular(detail::perturb(state0, delta)),
                                             params, forcing, t, stop_cfg, solver_cfg);
        double diff = pert.is_infinity() ? std::numeric_limits<double>::infinity()
                                         : detail::sup_difference(base.state(), pert.state());
        report.entries.push_back(StabilityEntry{delta, diff});
    }
    // least squares on log-log pairs with delta > 0 and finite difference
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& e : report.entries) {
        if (e.delta <= 0.0 || !std::isfinite(e.sup_difference) || e.sup_difference <= 0.0) continue;
        double lx = std::log(e.delta), ly = std::log(e.sup_difference);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n >= 2) report.fitted_order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return report;
}

}  // namespace nsf
