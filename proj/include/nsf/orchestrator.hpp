// Copyright (c) 2026 the nsfstat authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "nsf/config.hpp"
#include "nsf/io.hpp"

namespace nsf {

struct RunManifest {
    std::string config_hash;   // FNV-1a of the canonical config serialization
    std::string mode;
    int schema_version = 1;
    double wall_seconds = 0.0;  // informational; never part of hashed outputs
    std::vector<std::pair<std::string, std::string>> files;  // name -> content hash
    json extra;  // per-mode scalar results (slopes, distances, ...)
};

namespace detail {

inline std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// canonical serialization of everything that determines the outputs
inline json canonical_config(const RunConfig& c) {
    json j;
    j["schema_version"] = c.schema_version;
    j["mode"] = mode_name(c.mode);
    j["grid"] = {{"dim", c.grid.dim}, {"n", c.grid.n}};
    j["params"] = {{"c_v", c.params.c_v}, {"mu", c.params.mu}, {"eta", c.params.eta},
                   {"kappa", c.params.kappa}};
    j["forcing"] = {{"type", c.forcing.type}, {"g", c.forcing.g_amplitude},
                    {"q", c.forcing.q_amplitude}, {"axis", c.forcing.axis}};
    j["stopping"] = {{"threshold_m", c.stopping.threshold_m}, {"rho_floor", c.stopping.rho_floor},
                     {"theta_floor", c.stopping.theta_floor}, {"dt_min", c.stopping.dt_min}};
    j["metric"] = {{"truncation_k", c.metric.truncation_k}, {"q", c.metric.q}};
    j["solver"] = {{"dt_init", c.solver.dt_init}, {"cfl", c.solver.cfl},
                   {"dt_min", c.solver.dt_min}, {"dealias", c.solver.dealias},
                   {"dt_fixed", c.solver.dt_fixed}};
    j["distribution"] = {{"base_rho", c.distribution.base_rho},
                         {"base_theta", c.distribution.base_theta},
                         {"sigma", c.distribution.sigma},
                         {"decay_r", c.distribution.decay_r},
                         {"m_max", c.distribution.m_max},
                         {"margin", c.distribution.margin}};
    j["times"] = c.times;
    j["n_members"] = c.n_members;
    j["seed"] = c.seed;
    j["t_end"] = c.t_end;
    j["stability"] = {{"deltas", c.stability_deltas}};
    j["slln"] = {{"n_list", c.slln_n_list}, {"replicates", c.slln_replicates}};
    j["markov"] = {{"lambda", c.mixture_lambda}};
    // worker count and output directory deliberately excluded: they must
    // not influence numerical results
    return j;
}

inline json stopping_to_json(const StoppingRecord& r) {
    json j;
    j["triggered"] = r.triggered();
    j["reason"] = to_string(r.reason);
    j["t_stop"] = std::isfinite(r.t_stop) ? json(r.t_stop) : json("inf");
    j["peak_value"] = r.peak_value;
    return j;
}

class OutputSink {
  public:
    explicit OutputSink(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    const std::filesystem::path& dir() const { return dir_; }

    std::filesystem::path path(const std::string& name) const { return dir_ / name; }

    void record(RunManifest& manifest, const std::string& name) const {
        manifest.files.emplace_back(name, hex64(io::hash_file(dir_ / name)));
    }

  private:
    std::filesystem::path dir_;
};

inline void write_plot_csv(const std::filesystem::path& path,
                           const std::vector<std::string>& columns,
                           const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_plot_csv: cannot open " + path.string());
    for (std::size_t i = 0; i < columns.size(); ++i)
        out << columns[i] << (i + 1 < columns.size() ? "," : "\n");
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << io::format_double(row[i]) << (i + 1 < row.size() ? "," : "\n");
    }
}

// ---- mode handlers ----

inline void run_solve(const RunConfig& c, const OutputSink& sink, RunManifest& manifest) {
    State initial = c.distribution.sigma > 0.0
                        ? sample_state(c.distribution, 0)
                        : State::constant(c.grid, c.distribution.base_rho, c.distribution.base_theta);
    Forcing forcing = c.forcing.realize(c.grid);
    io::write_snapshot(sink.path("initial.nsfs"), initial);
    Trajectory traj = solve(initial, c.t_end, c.params, forcing, c.solver, &c.stopping);
    io::write_diagnostics_csv(sink.path("diagnostics.csv"), traj.records);
    io::write_snapshot(sink.path("final.nsfs"), traj.final_state);
    LowerBoundSeries bounds = lower_bound_monitor(traj, c.params);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < bounds.times.size(); ++i)
        rows.push_back({bounds.times[i], bounds.rho_floor[i], bounds.theta_floor[i],
                        traj.records[i].min_rho, traj.records[i].min_theta});
    write_plot_csv(sink.path("lower_bounds.csv"),
                   {"time", "rho_floor", "theta_floor", "min_rho", "min_theta"}, rows);
    manifest.extra["final_time"] = traj.final_time;
    manifest.extra["terminated_early"] = traj.termination == Termination::Stopped;
    manifest.extra["stop_reason"] = to_string(traj.stop_trigger);
    manifest.extra["lower_bound_violated"] = bounds.violated;
    sink.record(manifest, "initial.nsfs");
    sink.record(manifest, "diagnostics.csv");
    sink.record(manifest, "final.nsfs");
    sink.record(manifest, "lower_bounds.csv");
}

inline void run_stability(const RunConfig& c, const OutputSink& sink, RunManifest& manifest) {
    State initial = c.distribution.sigma > 0.0
                        ? sample_state(c.distribution, 0)
                        : State::constant(c.grid, c.distribution.base_rho, c.distribution.base_theta);
    Forcing forcing = c.forcing.realize(c.grid);
    StabilityReport report = stability_probe(initial, c.params, forcing, c.stability_deltas,
                                             c.t_end, c.stopping, c.solver);
    std::vector<std::vector<double>> rows;
    for (const auto& e : report.entries) rows.push_back({e.delta, e.sup_difference});
    write_plot_csv(sink.path("stability.csv"), {"delta", "sup_difference"}, rows);
    manifest.extra["fitted_order"] = report.fitted_order;
    sink.record(manifest, "stability.csv");
}

inline void run_metric_probe(const RunConfig& c, const OutputSink& sink, RunManifest& manifest) {
    State initial = c.distribution.sigma > 0.0
                        ? sample_state(c.distribution, 0)
                        : State::constant(c.grid, c.distribution.base_rho, c.distribution.base_theta);
    Forcing forcing = c.forcing.realize(c.grid);
    ExtendedPath path = evolve_at_times(initial, c.times, c.params, forcing, c.stopping, c.solver);
    ExtendedState u0 = ExtendedState::regular(initial);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < c.times.size(); ++i) {
        rows.push_back({c.times[i], metric_d(path.at_times[i], u0, c.metric),
                        metric_d(path.at_times[i], ExtendedState::infinity(), c.metric)});
    }
    write_plot_csv(sink.path("metric_probe.csv"),
                   {"time", "distance_to_initial", "distance_to_infinity"}, rows);
    double s = c.times.empty() ? 0.1 : c.times.front();
    SolverConfig fixed = c.solver;
    if (fixed.dt_fixed <= 0.0) fixed.dt_fixed = 1e-3;
    manifest.extra["semigroup_defect"] =
        semigroup_check(u0, forcing, c.params, s, s, c.stopping, fixed, c.metric);
    manifest.extra["stopping"] = stopping_to_json(path.stopping);
    sink.record(manifest, "metric_probe.csv");
}

inline void write_ensemble_outputs(const EnsembleEstimate& est, const RunConfig& c,
                                   const OutputSink& sink, RunManifest& manifest) {
    json doc;
    doc["schema_version"] = 1;
    doc["config"] = canonical_config(c);
    doc["seed"] = c.seed;
    doc["n_members"] = est.n_members;
    doc["times"] = est.times;
    doc["blowup_fraction"] = est.blowup_fraction;
    doc["observable_mean"] = est.observable_mean;
    doc["observable_half_width"] = est.observable_half_width;
    doc["observable_censored_mean"] = est.observable_censored_mean;
    json stops = json::array();
    for (const auto& r : est.member_stopping) stops.push_back(stopping_to_json(r));
    doc["member_stopping"] = stops;
    json fields = json::array();
    for (std::size_t ti = 0; ti < est.times.size(); ++ti) {
        char name[64];
        std::snprintf(name, sizeof(name), "moment_rho_t%03zu.nsff", ti);
        io::write_field_binary(sink.path(name), est.moment_rho[ti]);
        fields.push_back(name);
        sink.record(manifest, name);
        std::snprintf(name, sizeof(name), "moment_entropy_t%03zu.nsff", ti);
        io::write_field_binary(sink.path(name), est.moment_entropy_field[ti]);
        fields.push_back(name);
        sink.record(manifest, name);
        for (int d = 0; d < c.grid.dim; ++d) {
            std::snprintf(name, sizeof(name), "moment_momentum%d_t%03zu.nsff", d, ti);
            io::write_field_binary(sink.path(name), est.moment_momentum[ti][d]);
            fields.push_back(name);
            sink.record(manifest, name);
        }
    }
    doc["moment_files"] = fields;
    std::ofstream out(sink.path("ensemble.json"));
    out << doc.dump(2) << "\n";
    out.close();
    sink.record(manifest, "ensemble.json");

    std::vector<std::vector<double>> rows;
    for (std::size_t ti = 0; ti < est.times.size(); ++ti)
        rows.push_back({est.times[ti], est.blowup_fraction[ti]});
    write_plot_csv(sink.path("blowup_fraction.csv"), {"time", "blowup_fraction"}, rows);
    sink.record(manifest, "blowup_fraction.csv");
}

inline void run_ensemble(const RunConfig& c, const OutputSink& sink, RunManifest& manifest) {
    Forcing forcing = c.forcing.realize(c.grid);
    std::vector<Observable> obs{make_cutoff_observable(10.0, c.metric.q),
                                make_windowed_moment(1, {1, 0, 0}, 4.0, false, c.metric.q)};
    EnsembleConfig ecfg;
    ecfg.workers = c.workers;
    EnsembleEstimate est = pushforward_estimate(c.distribution, forcing, c.params, c.times,
                                                c.n_members, c.stopping, c.solver, obs, ecfg);
    write_ensemble_outputs(est, c, sink, manifest);
}

inline void run_slln_study(const RunConfig& c, const OutputSink& sink, RunManifest& manifest) {
    Forcing forcing = c.forcing.realize(c.grid);
    EnsembleConfig ecfg;
    ecfg.workers = c.workers;
    int n_ref = c.slln_n_list.empty() ? 8 : 8 * c.slln_n_list.back();
    SllnStudy study =
        slln_convergence_study(c.distribution, forcing, c.params, c.t_end, c.slln_n_list,
                               c.slln_replicates, n_ref, c.stopping, c.solver, ecfg);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < study.n_list.size(); ++i)
        rows.push_back({static_cast<double>(study.n_list[i]), study.mean_l1_error[i],
                        study.mean_half_width[i]});
    write_plot_csv(sink.path("slln_loglog.csv"), {"n", "mean_l1_error", "mean_half_width"}, rows);
    manifest.extra["slope"] = study.slope;
    sink.record(manifest, "slln_loglog.csv");
}

inline void run_markov_check(const RunConfig& c, const OutputSink& sink, RunManifest& manifest) {
    Forcing forcing = c.forcing.realize(c.grid);
    EnsembleConfig ecfg;
    ecfg.workers = c.workers;
    std::vector<Observable> obs{make_cutoff_observable(10.0, c.metric.q)};

    // M_0 = identity: at t = 0 the censored rho moment equals the sample
    // mean of the initial data
    std::vector<double> t0{0.0};
    EnsembleEstimate at0 = pushforward_estimate(c.distribution, forcing, c.params, t0, c.n_members,
                                                c.stopping, c.solver, obs, ecfg);
    std::vector<double> acc(c.grid.total_points(), 0.0);
    for (int m = 0; m < c.n_members; ++m) {
        State s = sample_state(c.distribution, static_cast<std::uint64_t>(m));
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += s.rho[k] / c.n_members;
    }
    double identity_defect = 0.0;
    for (std::size_t k = 0; k < acc.size(); ++k)
        identity_defect = std::max(identity_defect, std::abs(acc[k] - at0.moment_rho.front()[k]));

    // convex mixture identity under matched member substreams
    DataDistribution dist_b = c.distribution;
    dist_b.seed = hash_combine(c.distribution.seed, 0x6d697874ULL);
    double lambda = c.mixture_lambda;
    int n_a = static_cast<int>(std::lround(lambda * c.n_members));
    EnsembleEstimate mixed =
        pushforward_mixture(c.distribution, dist_b, lambda, forcing, c.params, c.times, c.n_members,
                            c.stopping, c.solver, obs, ecfg);
    EnsembleEstimate part_a = n_a > 0
                                  ? pushforward_estimate(c.distribution, forcing, c.params, c.times,
                                                         n_a, c.stopping, c.solver, obs, ecfg)
                                  : EnsembleEstimate{};
    EnsembleEstimate part_b =
        c.n_members - n_a > 0
            ? pushforward_estimate(dist_b, forcing, c.params, c.times, c.n_members - n_a, c.stopping,
                                   c.solver, obs, ecfg)
            : EnsembleEstimate{};
    double mixture_defect = 0.0;
    for (std::size_t ti = 0; ti < c.times.size(); ++ti) {
        double wa = static_cast<double>(n_a) / c.n_members;
        double combined = 0.0;
        if (n_a > 0) combined += wa * part_a.observable_mean[ti][0];
        if (c.n_members - n_a > 0) combined += (1.0 - wa) * part_b.observable_mean[ti][0];
        mixture_defect = std::max(mixture_defect,
                                  std::abs(combined - mixed.observable_mean[ti][0]));
    }

    // product-measure identity for a two-point parameter marginal
    Parameters p2 = c.params;
    p2.mu *= 2.0;
    EnsembleEstimate prod = pushforward_product_measure(c.distribution, forcing, {c.params, p2},
                                                        {0.5, 0.5}, c.times, c.n_members,
                                                        c.stopping, c.solver, obs, ecfg);
    EnsembleEstimate only1 = pushforward_estimate(c.distribution, forcing, c.params, c.times,
                                                  c.n_members, c.stopping, c.solver, obs, ecfg);
    EnsembleEstimate only2 = pushforward_estimate(c.distribution, forcing, p2, c.times, c.n_members,
                                                  c.stopping, c.solver, obs, ecfg);
    double product_defect = 0.0;
    for (std::size_t ti = 0; ti < c.times.size(); ++ti) {
        double combined = 0.5 * only1.observable_mean[ti][0] + 0.5 * only2.observable_mean[ti][0];
        product_defect =
            std::max(product_defect, std::abs(combined - prod.observable_mean[ti][0]));
    }

    manifest.extra["identity_defect"] = identity_defect;
    manifest.extra["mixture_defect"] = mixture_defect;
    manifest.extra["product_defect"] = product_defect;
    std::vector<std::vector<double>> rows{{identity_defect, mixture_defect, product_defect}};
    write_plot_csv(sink.path("markov_check.csv"),
                   {"identity_defect", "mixture_defect", "product_defect"}, rows);
    sink.record(manifest, "markov_check.csv");
}

}  // namespace detail

// Dispatch a validated config to its mode handler; write all outputs and
// the manifest into the output directory.
inline RunManifest run(const RunConfig& config) {
    auto t0 = std::chrono::steady_clock::now();
    detail::OutputSink sink(config.out_dir);
    RunManifest manifest;
    manifest.mode = mode_name(config.mode);
    manifest.schema_version = config.schema_version;
    manifest.config_hash = detail::hex64(io::fnv1a(detail::canonical_config(config).dump()));
    manifest.extra = json::object();

    switch (config.mode) {
        case RunMode::Solve: detail::run_solve(config, sink, manifest); break;
        case RunMode::Stability: detail::run_stability(config, sink, manifest); break;
        case RunMode::MetricProbe: detail::run_metric_probe(config, sink, manifest); break;
        case RunMode::Ensemble: detail::run_ensemble(config, sink, manifest); break;
        case RunMode::SllnStudy: detail::run_slln_study(config, sink, manifest); break;
        case RunMode::MarkovCheck: detail::run_markov_check(config, sink, manifest); break;
    }

    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json doc;
    doc["schema_version"] = manifest.schema_version;
    doc["mode"] = manifest.mode;
    doc["config_hash"] = manifest.config_hash;
    doc["wall_seconds"] = manifest.wall_seconds;
    doc["results"] = manifest.extra;
    json files = json::object();
    for (const auto& [name, hash] : manifest.files) files[name] = hash;
    doc["files"] = files;
    std::ofstream out(sink.path("manifest.json"));
    out << doc.dump(2) << "\n";
    return manifest;
}

}  // namespace nsf
