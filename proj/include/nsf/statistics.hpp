// Copyright (c) 2026 the nsfstat authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "nsf/extended.hpp"
#include "nsf/metric.hpp"
#include "nsf/rng.hpp"

namespace nsf {

// ---- random initial data ----

// Law of the random initial data: positive base constants plus truncated
// random Fourier perturbations with spectral decay sigma |m|^{-r},
// rejection-resampled until the positivity margins hold.
struct DataDistribution {
    Grid grid;
    double base_rho = 1.0;
    double base_theta = 1.0;
    double sigma = 0.1;
    double decay_r = 2.0;
    int m_max = 2;           // active band |m|_inf <= m_max
    double margin = 0.05;    // min rho_0, min theta_0 >= margin
    std::uint64_t seed = 0;

    void validate() const {
        if (base_rho <= 0.0 || base_theta <= 0.0)
            throw std::invalid_argument("DataDistribution: base constants must be positive");
        if (sigma < 0.0) throw std::invalid_argument("DataDistribution: sigma must be >= 0");
        if (decay_r <= 1.0) throw std::invalid_argument("DataDistribution: decay r must exceed 1");
        if (m_max < 1) throw std::invalid_argument("DataDistribution: m_max must be >= 1");
        if (margin <= 0.0) throw std::invalid_argument("DataDistribution: margin must be positive");
    }
};

namespace detail {

// canonical half of the active band (excludes 0, keeps one of {m, -m})
inline std::vector<std::array<int, 3>> perturbation_modes(int dim, int m_max) {
    std::vector<std::array<int, 3>> modes;
    std::array<int, 3> lo{-m_max, dim > 1 ? -m_max : 0, dim > 2 ? -m_max : 0};
    std::array<int, 3> hi{m_max, dim > 1 ? m_max : 0, dim > 2 ? m_max : 0};
    std::array<int, 3> m{};
    for (m[0] = lo[0]; m[0] <= hi[0]; ++m[0])
        for (m[1] = lo[1]; m[1] <= hi[1]; ++m[1])
            for (m[2] = lo[2]; m[2] <= hi[2]; ++m[2]) {
                int first_nonzero = 0;
                for (int d = 0; d < 3; ++d)
                    if (m[d] != 0) {
                        first_nonzero = m[d];
                        break;
                    }
                if (first_nonzero > 0) modes.push_back(m);
            }
    return modes;
}

inline ScalarField random_perturbed_field(const DataDistribution& dist, double base,
                                          NormalStream& stream) {
    const Grid& g = dist.grid;
    std::vector<double> v(g.total_points(), base);
    for (const auto& m : perturbation_modes(g.dim, dist.m_max)) {
        double m2 = 0.0;
        for (int d = 0; d < g.dim; ++d) m2 += static_cast<double>(m[d]) * m[d];
        double amp = dist.sigma * std::pow(std::sqrt(m2), -dist.decay_r);
        double a = amp * stream.normal();
        double b = amp * stream.normal();
        if (a == 0.0 && b == 0.0) continue;
        for (std::size_t i = 0; i < v.size(); ++i) {
            auto idx = g.unflatten(i);
            double phase = 0.0;
            for (int d = 0; d < g.dim; ++d) phase += M_PI * m[d] * g.coordinate(idx[d]);
            v[i] += a * std::cos(phase) + b * std::sin(phase);
        }
    }
    return ScalarField(g, std::move(v));
}

}  // namespace detail

// One i.i.d. draw for the given member index; deterministic in
// (seed, member) via counter-based substreams.
inline State sample_state(const DataDistribution& dist, std::uint64_t member) {
    dist.validate();
    const int max_attempts = 100;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        NormalStream stream(stream_key(dist.seed, member, static_cast<std::uint64_t>(attempt)));
        ScalarField rho = detail::random_perturbed_field(dist, dist.base_rho, stream);
        ScalarField theta = detail::random_perturbed_field(dist, dist.base_theta, stream);
        std::vector<ScalarField> u;
        for (int d = 0; d < dist.grid.dim; ++d)
            u.push_back(detail::random_perturbed_field(dist, 0.0, stream));
        if (rho.min() >= dist.margin && theta.min() >= dist.margin)
            return State{std::move(rho), std::move(theta), VectorField(std::move(u))};
    }
    throw DistributionInfeasible("sample_state: rejection rate above 99%");
}

inline std::vector<State> sample_initial_data(const DataDistribution& dist, int count) {
    if (count < 1) throw std::invalid_argument("sample_initial_data: count must be >= 1");
    std::vector<State> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(sample_state(dist, static_cast<std::uint64_t>(i)));
    return out;
}

// ---- deterministic reduction ----

namespace detail {

// fixed pairwise reduction over member index; independent of worker
// count and scheduling
template <class Get>
double pairwise_sum(std::size_t lo, std::size_t hi, const Get& get) {
    if (hi - lo == 1) return get(lo);
    std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(lo, mid, get) + pairwise_sum(mid, hi, get);
}

template <class Task>
void run_parallel(std::size_t count, int workers, const Task& task) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    int w = std::min<std::size_t>(workers, count);
    for (int i = 0; i < w; ++i)
        pool.emplace_back([&] {
            for (std::size_t j = next.fetch_add(1); j < count; j = next.fetch_add(1)) task(j);
        });
    for (auto& th : pool) th.join();
}

}  // namespace detail

// ---- push-forward estimation ----

struct EnsembleConfig {
    int workers = 1;
    bool store_members = false;  // keep the Dirac-mixture member list per query time
};

// Censored empirical moments and observable statistics at query times.
struct EnsembleEstimate {
    int n_members = 0;
    std::vector<double> times;
    std::vector<double> blowup_fraction;                  // per time, non-decreasing
    std::vector<ScalarField> moment_rho;                  // per time: (1/N) sum rho 1_alive
    std::vector<std::vector<ScalarField>> moment_momentum;  // per time, dim components of rho u
    std::vector<ScalarField> moment_entropy_field;        // per time: rho log(theta^c_v / rho)
    std::vector<std::vector<double>> observable_mean;          // [time][observable]
    std::vector<std::vector<double>> observable_half_width;    // 1.96 sd / sqrt(N)
    std::vector<std::vector<double>> observable_censored_mean; // alive contributions only
    std::vector<StoppingRecord> member_stopping;
    std::vector<std::vector<ExtendedState>> members;      // [time][member] when stored
};

using StateSampler = std::function<State(std::uint64_t member)>;

namespace detail {

struct MemberResult {
    std::vector<char> alive;                      // per time
    std::vector<std::vector<double>> rho;         // per time, grid samples (alive only)
    std::vector<std::vector<double>> momentum;    // per time, dim * npts concatenated
    std::vector<std::vector<double>> entropy;     // per time
    std::vector<std::vector<double>> obs;         // per time, per observable
    StoppingRecord stopping;
    std::vector<ExtendedState> states;            // per time when stored
};

inline MemberResult run_member(const State& initial, const std::vector<double>& times,
                               const Parameters& params, const Forcing& forcing,
                               const StoppingConfig& stop_cfg, const SolverConfig& solver_cfg,
                               const std::vector<Observable>& observables, double c_v,
                               bool store_states) {
    MemberResult r;
    ExtendedPath path = evolve_at_times(initial, times, params, forcing, stop_cfg, solver_cfg);
    r.stopping = path.stopping;
    const std::size_t npts = initial.grid().total_points();
    const int dim = initial.grid().dim;
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        const ExtendedState& u = path.at_times[ti];
        bool alive = !u.is_infinity();
        r.alive.push_back(alive ? 1 : 0);
        if (alive) {
            const State& s = u.state();
            std::vector<double> rho(npts), mom(npts * dim), ent(npts);
            for (std::size_t k = 0; k < npts; ++k) {
                rho[k] = s.rho[k];
                ent[k] = s.rho[k] * (c_v * std::log(s.theta[k]) - std::log(s.rho[k]));
                for (int d = 0; d < dim; ++d) mom[d * npts + k] = s.rho[k] * s.u[d][k];
            }
            r.rho.push_back(std::move(rho));
            r.momentum.push_back(std::move(mom));
            r.entropy.push_back(std::move(ent));
        } else {
            r.rho.emplace_back();
            r.momentum.emplace_back();
            r.entropy.emplace_back();
        }
        std::vector<double> vals;
        for (const auto& f : observables) vals.push_back(f(u));
        r.obs.push_back(std::move(vals));
        if (store_states) r.states.push_back(u);
    }
    return r;
}

}  // namespace detail

// Run an ensemble of extended trajectories from an arbitrary member
// sampler and reduce censored moments and observable statistics in a
// fixed member order.
inline EnsembleEstimate ensemble_run(const StateSampler& sampler, int n_members, const Grid& grid,
                                     const Forcing& forcing, const Parameters& params,
                                     const std::vector<double>& times,
                                     const StoppingConfig& stop_cfg, const SolverConfig& solver_cfg,
                                     const std::vector<Observable>& observables = {},
                                     const EnsembleConfig& cfg = {}) {
    if (n_members < 1) throw std::invalid_argument("ensemble_run: N must be >= 1");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (times[i] < times[i - 1]) throw std::invalid_argument("ensemble_run: times must be sorted");
    for (double t : times)
        if (t < 0.0) throw std::invalid_argument("ensemble_run: times must be nonnegative");

    const std::size_t npts = grid.total_points();
    const int dim = grid.dim;
    std::vector<detail::MemberResult> results(n_members);
    std::exception_ptr config_error;
    std::once_flag config_error_once;
    detail::run_parallel(n_members, cfg.workers, [&](std::size_t member) {
        try {
            State initial = sampler(member);
            results[member] = detail::run_member(initial, times, params, forcing, stop_cfg,
                                                 solver_cfg, observables, params.c_v,
                                                 cfg.store_members);
        } catch (const DistributionInfeasible&) {
            std::call_once(config_error_once, [&] { config_error = std::current_exception(); });
        } catch (...) {
            // a failed member counts as absorbed from the start, the
            // ensemble itself never aborts
            detail::MemberResult r;
            r.stopping.reason = StopReason::NonFinite;
            r.stopping.t_stop = 0.0;
            for (std::size_t ti = 0; ti < times.size(); ++ti) {
                r.alive.push_back(0);
                r.rho.emplace_back();
                r.momentum.emplace_back();
                r.entropy.emplace_back();
                std::vector<double> vals;
                for (const auto& f : observables) vals.push_back(f.at_infinity());
                r.obs.push_back(std::move(vals));
                if (cfg.store_members) r.states.push_back(ExtendedState::infinity());
            }
            results[member] = std::move(r);
        }
    });
    if (config_error) std::rethrow_exception(config_error);

    EnsembleEstimate est;
    est.n_members = n_members;
    est.times = times;
    const std::size_t n = static_cast<std::size_t>(n_members);
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        long absorbed = 0;
        for (const auto& r : results) absorbed += r.alive[ti] ? 0 : 1;
        est.blowup_fraction.push_back(static_cast<double>(absorbed) / n_members);

        auto field_moment = [&](auto&& fetch) {
            std::vector<double> acc(npts);
            for (std::size_t k = 0; k < npts; ++k)
                acc[k] = detail::pairwise_sum(0, n, [&](std::size_t m) { return fetch(m, k); }) /
                         n_members;
            return ScalarField(grid, std::move(acc));
        };
        est.moment_rho.push_back(field_moment([&](std::size_t m, std::size_t k) {
            return results[m].alive[ti] ? results[m].rho[ti][k] : 0.0;
        }));
        std::vector<ScalarField> mom;
        for (int d = 0; d < dim; ++d)
            mom.push_back(field_moment([&](std::size_t m, std::size_t k) {
                return results[m].alive[ti] ? results[m].momentum[ti][d * npts + k] : 0.0;
            }));
        est.moment_momentum.push_back(std::move(mom));
        est.moment_entropy_field.push_back(field_moment([&](std::size_t m, std::size_t k) {
            return results[m].alive[ti] ? results[m].entropy[ti][k] : 0.0;
        }));

        std::vector<double> means, hws, censored;
        for (std::size_t oi = 0; oi < observables.size(); ++oi) {
            double sum =
                detail::pairwise_sum(0, n, [&](std::size_t m) { return results[m].obs[ti][oi]; });
            double mean = sum / n_members;
            double sq = detail::pairwise_sum(0, n, [&](std::size_t m) {
                double d = results[m].obs[ti][oi] - mean;
                return d * d;
            });
            double sd = n_members > 1 ? std::sqrt(sq / (n_members - 1)) : 0.0;
            double cens = detail::pairwise_sum(0, n, [&](std::size_t m) {
                              return results[m].alive[ti] ? results[m].obs[ti][oi] : 0.0;
                          }) /
                          n_members;
            means.push_back(mean);
            hws.push_back(1.96 * sd / std::sqrt(static_cast<double>(n_members)));
            censored.push_back(cens);
        }
        est.observable_mean.push_back(std::move(means));
        est.observable_half_width.push_back(std::move(hws));
        est.observable_censored_mean.push_back(std::move(censored));

        if (cfg.store_members) {
            std::vector<ExtendedState> snap;
            for (const auto& r : results) snap.push_back(r.states[ti]);
            est.members.push_back(std::move(snap));
        }
    }
    for (const auto& r : results) est.member_stopping.push_back(r.stopping);
    return est;
}

// Monte Carlo push-forward estimate for i.i.d. initial data.
inline EnsembleEstimate pushforward_estimate(const DataDistribution& dist, const Forcing& forcing,
                                             const Parameters& params,
                                             const std::vector<double>& times, int n_members,
                                             const StoppingConfig& stop_cfg,
                                             const SolverConfig& solver_cfg,
                                             const std::vector<Observable>& observables = {},
                                             const EnsembleConfig& cfg = {}) {
    dist.validate();
    return ensemble_run([&dist](std::uint64_t m) { return sample_state(dist, m); }, n_members,
                        dist.grid, forcing, params, times, stop_cfg, solver_cfg, observables, cfg);
}

// ---- SLLN convergence study ----

struct SllnStudy {
    std::vector<int> n_list;
    std::vector<std::vector<double>> l1_errors;  // [replicate][n index]
    std::vector<double> mean_l1_error;           // per n
    std::vector<double> mean_half_width;         // per n, first observable
    double slope = 0.0;                          // log-log fit of mean error vs N
};

inline SllnStudy slln_convergence_study(const DataDistribution& dist, const Forcing& forcing,
                                        const Parameters& params, double time,
                                        const std::vector<int>& n_list, int replicates, int n_ref,
                                        const StoppingConfig& stop_cfg,
                                        const SolverConfig& solver_cfg,
                                        const EnsembleConfig& cfg = {}) {
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1])
            throw std::invalid_argument("slln_convergence_study: N list must increase");
    if (!n_list.empty() && n_ref < 8 * n_list.back() && dist.sigma > 0.0)
        throw std::invalid_argument("slln_convergence_study: reference N must be >= 8 max(N)");

    std::vector<double> times{time};
    std::vector<Observable> obs{make_windowed_moment(1, {0, 0, 0}, 8.0)};

    DataDistribution ref_dist = dist;
    ref_dist.seed = hash_combine(dist.seed, 0x7265666572656e63ULL);  // reference stream
    ScalarField ref = pushforward_estimate(ref_dist, forcing, params, times,
                                           dist.sigma == 0.0 ? 1 : n_ref, stop_cfg, solver_cfg, {},
                                           cfg)
                          .moment_rho.front();

    SllnStudy study;
    study.n_list = n_list;
    study.mean_l1_error.assign(n_list.size(), 0.0);
    study.mean_half_width.assign(n_list.size(), 0.0);
    for (int rep = 0; rep < replicates; ++rep) {
        std::vector<double> errs;
        for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
            DataDistribution d = dist;
            d.seed = hash_combine(hash_combine(dist.seed, rep + 1), n_list[ni]);
            EnsembleEstimate est = pushforward_estimate(d, forcing, params, times, n_list[ni],
                                                        stop_cfg, solver_cfg, obs, cfg);
            ScalarField diff = est.moment_rho.front() - ref;
            double l1 = 0.0;
            for (double v : diff.values()) l1 += std::abs(v);
            l1 *= dist.grid.cell_volume();
            errs.push_back(l1);
            study.mean_l1_error[ni] += l1 / replicates;
            study.mean_half_width[ni] += est.observable_half_width.front().front() / replicates;
        }
        study.l1_errors.push_back(std::move(errs));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        if (study.mean_l1_error[i] <= 0.0) continue;
        double lx = std::log(static_cast<double>(n_list[i]));
        double ly = std::log(study.mean_l1_error[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n >= 2) study.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return study;
}

// ---- Markov property checks ----

// Ensemble over the lambda-mixture of two data distributions: the first
// round(lambda N) members replay distribution A's substreams, the rest
// replay B's.
inline EnsembleEstimate pushforward_mixture(const DataDistribution& dist_a,
                                            const DataDistribution& dist_b, double lambda,
                                            const Forcing& forcing, const Parameters& params,
                                            const std::vector<double>& times, int n_members,
                                            const StoppingConfig& stop_cfg,
                                            const SolverConfig& solver_cfg,
                                            const std::vector<Observable>& observables = {},
                                            const EnsembleConfig& cfg = {}) {
    if (lambda < 0.0 || lambda > 1.0)
        throw std::invalid_argument("pushforward_mixture: lambda must lie in [0, 1]");
    std::uint64_t n_a = static_cast<std::uint64_t>(std::lround(lambda * n_members));
    auto sampler = [&, n_a](std::uint64_t m) {
        return m < n_a ? sample_state(dist_a, m) : sample_state(dist_b, m - n_a);
    };
    return ensemble_run(sampler, n_members, dist_a.grid, forcing, params, times, stop_cfg,
                        solver_cfg, observables, cfg);
}

// Aggregate estimate for a product measure with a finite parameter set:
// the w-weighted combination of per-parameter push-forwards sharing the
// initial-data substreams.
inline EnsembleEstimate pushforward_product_measure(
    const DataDistribution& dist, const Forcing& forcing, const std::vector<Parameters>& params_set,
    const std::vector<double>& weights, const std::vector<double>& times, int n_members,
    const StoppingConfig& stop_cfg, const SolverConfig& solver_cfg,
    const std::vector<Observable>& observables = {}, const EnsembleConfig& cfg = {}) {
    if (params_set.size() != weights.size() || params_set.empty())
        throw std::invalid_argument("pushforward_product_measure: bad parameter set");
    double wsum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("pushforward_product_measure: negative weight");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-12)
        throw std::invalid_argument("pushforward_product_measure: weights must sum to 1");

    std::vector<EnsembleEstimate> parts;
    for (const auto& p : params_set)
        parts.push_back(pushforward_estimate(dist, forcing, p, times, n_members, stop_cfg,
                                             solver_cfg, observables, cfg));

    EnsembleEstimate agg;
    agg.n_members = n_members;
    agg.times = times;
    const Grid& grid = dist.grid;
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        double bf = 0.0;
        std::vector<double> acc_rho(grid.total_points(), 0.0);
        std::vector<std::vector<double>> acc_mom(grid.dim,
                                                 std::vector<double>(grid.total_points(), 0.0));
        std::vector<double> acc_ent(grid.total_points(), 0.0);
        std::vector<double> mean(observables.size(), 0.0), cens(observables.size(), 0.0),
            hw(observables.size(), 0.0);
        for (std::size_t j = 0; j < parts.size(); ++j) {
            const auto& p = parts[j];
            double w = weights[j];
            bf += w * p.blowup_fraction[ti];
            for (std::size_t k = 0; k < acc_rho.size(); ++k) {
                acc_rho[k] += w * p.moment_rho[ti][k];
                acc_ent[k] += w * p.moment_entropy_field[ti][k];
                for (int d = 0; d < grid.dim; ++d) acc_mom[d][k] += w * p.moment_momentum[ti][d][k];
            }
            for (std::size_t oi = 0; oi < observables.size(); ++oi) {
                mean[oi] += w * p.observable_mean[ti][oi];
                cens[oi] += w * p.observable_censored_mean[ti][oi];
                hw[oi] += w * p.observable_half_width[ti][oi];
            }
        }
        agg.blowup_fraction.push_back(bf);
        agg.moment_rho.emplace_back(grid, std::move(acc_rho));
        std::vector<ScalarField> mom;
        for (int d = 0; d < grid.dim; ++d) mom.emplace_back(grid, std::move(acc_mom[d]));
        agg.moment_momentum.push_back(std::move(mom));
        agg.moment_entropy_field.emplace_back(grid, std::move(acc_ent));
        agg.observable_mean.push_back(std::move(mean));
        agg.observable_censored_mean.push_back(std::move(cens));
        agg.observable_half_width.push_back(std::move(hw));
    }
    return agg;
}

}  // namespace nsf
