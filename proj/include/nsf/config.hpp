// Copyright (c) 2026 the nsfstat authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsf/errors.hpp"
#include "nsf/metric.hpp"
#include "nsf/solver.hpp"
#include "nsf/statistics.hpp"
#include "nsf/stopping.hpp"

namespace nsf {

using json = nlohmann::json;

enum class RunMode { Solve, Stability, MetricProbe, Ensemble, SllnStudy, MarkovCheck };

inline RunMode parse_mode(const std::string& s) {
    if (s == "solve") return RunMode::Solve;
    if (s == "stability") return RunMode::Stability;
    if (s == "metric-probe") return RunMode::MetricProbe;
    if (s == "ensemble") return RunMode::Ensemble;
    if (s == "slln-study") return RunMode::SllnStudy;
    if (s == "markov-check") return RunMode::MarkovCheck;
    throw ConfigRejected("unknown mode: " + s);
}

inline std::string mode_name(RunMode m) {
    switch (m) {
        case RunMode::Solve: return "solve";
        case RunMode::Stability: return "stability";
        case RunMode::MetricProbe: return "metric-probe";
        case RunMode::Ensemble: return "ensemble";
        case RunMode::SllnStudy: return "slln-study";
        case RunMode::MarkovCheck: return "markov-check";
    }
    return "?";
}

// Forcing described by config keys; realized on a grid on demand.
struct ForcingSpec {
    std::string type = "zero";  // zero | constant | cosine
    double g_amplitude = 0.0;
    double q_amplitude = 0.0;
    int axis = 0;

    Forcing realize(const Grid& grid) const {
        if (type == "zero") return Forcing::zero(grid);
        if (type == "constant") {
            std::vector<ScalarField> g;
            for (int d = 0; d < grid.dim; ++d)
                g.push_back(ScalarField::constant(grid, d == axis ? g_amplitude : 0.0));
            return Forcing{VectorField(std::move(g)), ScalarField::constant(grid, q_amplitude)};
        }
        if (type == "cosine") {
            int ax = axis;
            std::vector<ScalarField> g;
            for (int d = 0; d < grid.dim; ++d) {
                if (d == ax && g_amplitude != 0.0) {
                    double amp = g_amplitude;
                    g.push_back(ScalarField::sample(grid, [amp, ax](const std::array<double, 3>& x) {
                        return amp * std::cos(M_PI * x[ax]);
                    }));
                } else {
                    g.push_back(ScalarField::constant(grid, 0.0));
                }
            }
            // heat source kept nonnegative: q (1 + cos) / 2 in [0, q]
            double q = q_amplitude;
            ScalarField qf = ScalarField::sample(grid, [q, ax](const std::array<double, 3>& x) {
                return 0.5 * q * (1.0 + std::cos(M_PI * x[ax]));
            });
            return Forcing{VectorField(std::move(g)), std::move(qf)};
        }
        throw ConfigRejected("forcing.type: unknown value '" + type + "'");
    }
};

struct RunConfig {
    int schema_version = 1;
    RunMode mode = RunMode::Solve;
    Grid grid{1, 64};
    Parameters params;
    ForcingSpec forcing;
    StoppingConfig stopping;
    MetricConfig metric;
    SolverConfig solver;
    DataDistribution distribution{Grid{1, 64}};
    std::vector<double> times{0.1};
    int n_members = 16;
    std::uint64_t seed = 1;
    int workers = 1;
    std::string out_dir = "out";
    double t_end = 0.5;
    // mode-specific knobs
    std::vector<double> stability_deltas{1e-2, 1e-3, 1e-4};
    std::vector<int> slln_n_list{16, 32, 64, 128};
    int slln_replicates = 4;
    double mixture_lambda = 0.5;

    std::vector<std::string> warnings;  // unknown keys seen during ingestion
};

namespace detail {

// append "field: reason" items for every admissibility violation
inline void collect_violations(const RunConfig& c, std::vector<std::string>& v) {
    if (c.schema_version != 1) v.push_back("schema_version: must be 1");
    if (!(c.params.c_v > 1.0)) v.push_back("params.c_v: must be > 1");
    if (!(c.params.mu > 0.0)) v.push_back("params.mu: must be > 0");
    if (!(c.params.eta >= 0.0)) v.push_back("params.eta: must be >= 0");
    if (!(c.params.kappa > 0.0)) v.push_back("params.kappa: must be > 0");
    if (c.grid.dim < 1 || c.grid.dim > 3) v.push_back("grid.dim: must be 1, 2 or 3");
    if (c.grid.n < 8 || c.grid.n % 2 != 0) v.push_back("grid.n: must be even and >= 8");
    if (!(c.stopping.threshold_m > 0.0)) v.push_back("stopping.threshold_m: must be > 0");
    if (!(c.stopping.rho_floor > 0.0)) v.push_back("stopping.rho_floor: must be > 0");
    if (!(c.stopping.theta_floor > 0.0)) v.push_back("stopping.theta_floor: must be > 0");
    if (!(c.solver.dt_init > 0.0)) v.push_back("solver.dt_init: must be > 0");
    if (!(c.solver.dt_min > 0.0)) v.push_back("solver.dt_min: must be > 0");
    if (c.solver.dt_fixed < 0.0) v.push_back("solver.dt_fixed: must be >= 0");
    if (c.metric.truncation_k < 1) v.push_back("metric.truncation_k: must be >= 1");
    if (!(c.metric.q > 3.0 && c.metric.q <= 6.0)) v.push_back("metric.q: must lie in (3, 6]");
    if (!(c.distribution.base_rho > 0.0)) v.push_back("distribution.base_rho: must be > 0");
    if (!(c.distribution.base_theta > 0.0)) v.push_back("distribution.base_theta: must be > 0");
    if (c.distribution.sigma < 0.0) v.push_back("distribution.sigma: must be >= 0");
    if (!(c.distribution.decay_r > 1.0)) v.push_back("distribution.decay_r: must exceed 1");
    if (c.distribution.m_max < 1) v.push_back("distribution.m_max: must be >= 1");
    if (!(c.distribution.margin > 0.0 && c.distribution.margin < 1.0))
        v.push_back("distribution.margin: must lie in (0, 1)");
    if (c.n_members < 1) v.push_back("n_members: must be >= 1");
    if (c.workers < 1) v.push_back("workers: must be >= 1");
    if (c.times.empty()) v.push_back("times: must be non-empty");
    if (!std::is_sorted(c.times.begin(), c.times.end())) v.push_back("times: must be sorted");
    for (double t : c.times)
        if (t < 0.0) {
            v.push_back("times: entries must be >= 0");
            break;
        }
    if (!(c.t_end > 0.0)) v.push_back("t_end: must be > 0");
    if (c.forcing.type != "zero" && c.forcing.type != "constant" && c.forcing.type != "cosine")
        v.push_back("forcing.type: must be zero, constant or cosine");
    if (c.forcing.q_amplitude < 0.0) v.push_back("forcing.q: heat source must be >= 0");
    if (c.forcing.axis < 0 || c.forcing.axis >= c.grid.dim)
        v.push_back("forcing.axis: must index a grid axis");
    if (c.slln_replicates < 1) v.push_back("slln.replicates: must be >= 1");
    for (int n : c.slln_n_list)
        if (n < 1) {
            v.push_back("slln.n_list: entries must be >= 1");
            break;
        }
    if (!(c.mixture_lambda >= 0.0 && c.mixture_lambda <= 1.0))
        v.push_back("markov.lambda: must lie in [0, 1]");
}

inline void warn_unknown_keys(const json& obj, const std::set<std::string>& known,
                              const std::string& prefix, std::vector<std::string>& warnings) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!known.count(key)) warnings.push_back("unknown key ignored: " + prefix + key);
    }
}

}  // namespace detail

// Parse and fully validate a config document. Admissibility failures are
// collected and reported together in one ConfigRejected; unknown keys
// only produce warnings.
inline RunConfig parse_config(const json& doc) {
    RunConfig c;
    detail::warn_unknown_keys(
        doc,
        {"schema_version", "mode", "grid", "params", "forcing", "stopping", "metric", "solver",
         "distribution", "times", "n_members", "seed", "workers", "out_dir", "t_end", "stability",
         "slln", "markov"},
        "", c.warnings);

    c.schema_version = doc.value("schema_version", 1);
    if (doc.contains("mode")) c.mode = parse_mode(doc.at("mode").get<std::string>());
    int dim = 1, n = 64;
    if (doc.contains("grid")) {
        const json& g = doc.at("grid");
        detail::warn_unknown_keys(g, {"dim", "n"}, "grid.", c.warnings);
        dim = g.value("dim", 1);
        n = g.value("n", 64);
    }
    if (dim >= 1 && dim <= 3 && n >= 8 && n % 2 == 0) {
        c.grid = Grid{dim, n};
    } else {
        throw ConfigRejected("grid: dim must be 1..3 and n even >= 8");
    }
    if (doc.contains("params")) {
        const json& p = doc.at("params");
        detail::warn_unknown_keys(p, {"c_v", "mu", "eta", "kappa"}, "params.", c.warnings);
        c.params.c_v = p.value("c_v", c.params.c_v);
        c.params.mu = p.value("mu", c.params.mu);
        c.params.eta = p.value("eta", c.params.eta);
        c.params.kappa = p.value("kappa", c.params.kappa);
    }
    if (doc.contains("forcing")) {
        const json& f = doc.at("forcing");
        detail::warn_unknown_keys(f, {"type", "g", "q", "axis"}, "forcing.", c.warnings);
        c.forcing.type = f.value("type", c.forcing.type);
        c.forcing.g_amplitude = f.value("g", c.forcing.g_amplitude);
        c.forcing.q_amplitude = f.value("q", c.forcing.q_amplitude);
        c.forcing.axis = f.value("axis", c.forcing.axis);
    }
    if (doc.contains("stopping")) {
        const json& s = doc.at("stopping");
        detail::warn_unknown_keys(s, {"threshold_m", "rho_floor", "theta_floor", "dt_min"},
                                  "stopping.", c.warnings);
        c.stopping.threshold_m = s.value("threshold_m", c.stopping.threshold_m);
        c.stopping.rho_floor = s.value("rho_floor", c.stopping.rho_floor);
        c.stopping.theta_floor = s.value("theta_floor", c.stopping.theta_floor);
        c.stopping.dt_min = s.value("dt_min", c.stopping.dt_min);
    }
    if (doc.contains("metric")) {
        const json& m = doc.at("metric");
        detail::warn_unknown_keys(m, {"truncation_k", "q"}, "metric.", c.warnings);
        c.metric.truncation_k = m.value("truncation_k", c.metric.truncation_k);
        c.metric.q = m.value("q", c.metric.q);
    }
    if (doc.contains("solver")) {
        const json& s = doc.at("solver");
        detail::warn_unknown_keys(s, {"dt_init", "cfl", "dt_min", "dealias", "dt_fixed"}, "solver.",
                                  c.warnings);
        c.solver.dt_init = s.value("dt_init", c.solver.dt_init);
        c.solver.cfl = s.value("cfl", c.solver.cfl);
        c.solver.dt_min = s.value("dt_min", c.solver.dt_min);
        c.solver.dealias = s.value("dealias", c.solver.dealias);
        c.solver.dt_fixed = s.value("dt_fixed", c.solver.dt_fixed);
    }
    c.distribution = DataDistribution{c.grid};
    if (doc.contains("distribution")) {
        const json& d = doc.at("distribution");
        detail::warn_unknown_keys(
            d, {"base_rho", "base_theta", "sigma", "decay_r", "m_max", "margin"}, "distribution.",
            c.warnings);
        c.distribution.base_rho = d.value("base_rho", c.distribution.base_rho);
        c.distribution.base_theta = d.value("base_theta", c.distribution.base_theta);
        c.distribution.sigma = d.value("sigma", c.distribution.sigma);
        c.distribution.decay_r = d.value("decay_r", c.distribution.decay_r);
        c.distribution.m_max = d.value("m_max", c.distribution.m_max);
        c.distribution.margin = d.value("margin", c.distribution.margin);
    }
    if (doc.contains("times")) c.times = doc.at("times").get<std::vector<double>>();
    c.n_members = doc.value("n_members", c.n_members);
    c.seed = doc.value("seed", c.seed);
    c.workers = doc.value("workers", c.workers);
    c.out_dir = doc.value("out_dir", c.out_dir);
    c.t_end = doc.value("t_end", c.t_end);
    if (doc.contains("stability")) {
        const json& s = doc.at("stability");
        detail::warn_unknown_keys(s, {"deltas"}, "stability.", c.warnings);
        if (s.contains("deltas")) c.stability_deltas = s.at("deltas").get<std::vector<double>>();
    }
    if (doc.contains("slln")) {
        const json& s = doc.at("slln");
        detail::warn_unknown_keys(s, {"n_list", "replicates"}, "slln.", c.warnings);
        if (s.contains("n_list")) c.slln_n_list = s.at("n_list").get<std::vector<int>>();
        c.slln_replicates = s.value("replicates", c.slln_replicates);
    }
    if (doc.contains("markov")) {
        const json& m = doc.at("markov");
        detail::warn_unknown_keys(m, {"lambda"}, "markov.", c.warnings);
        c.mixture_lambda = m.value("lambda", c.mixture_lambda);
    }
    c.distribution.seed = c.seed;

    std::vector<std::string> violations;
    detail::collect_violations(c, violations);
    if (!violations.empty()) {
        std::string msg = "config rejected:";
        for (const auto& v : violations) msg += "\n  " + v;
        throw ConfigRejected(msg);
    }
    return c;
}

inline RunConfig ingest_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigRejected("cannot open config file: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigRejected(std::string("config parse error: ") + e.what());
    }
    return parse_config(doc);
}

}  // namespace nsf
