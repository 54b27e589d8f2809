// Copyright (c) 2026 the nsfstat authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nsf/statistics.hpp"

using namespace nsf;

namespace {

const Grid kGrid(1, 16);

DataDistribution default_dist(std::uint64_t seed = 1) {
    DataDistribution d{kGrid};
    d.sigma = 0.1;
    d.m_max = 2;
    d.margin = 0.05;
    d.seed = seed;
    return d;
}

double sup_state_diff(const State& a, const State& b) {
    double m = (a.rho - b.rho).sup_norm();
    m = std::max(m, (a.theta - b.theta).sup_norm());
    for (int d = 0; d < a.grid().dim; ++d) m = std::max(m, (a.u[d] - b.u[d]).sup_norm());
    return m;
}

}  // namespace

TEST_CASE("degenerate law: sigma = 0 reproduces the base state") {
    DataDistribution d = default_dist();
    d.sigma = 0.0;
    for (int m = 0; m < 4; ++m) {
        State s = sample_state(d, m);
        CHECK((s.rho + (-d.base_rho)).sup_norm() == 0.0);
        CHECK((s.theta + (-d.base_theta)).sup_norm() == 0.0);
        CHECK(s.u[0].sup_norm() == 0.0);
    }
}

TEST_CASE("samples respect the positivity margin and are seed-reproducible") {
    DataDistribution d = default_dist(99);
    d.sigma = 0.4;  // wide law so rejection actually happens sometimes
    for (int m = 0; m < 32; ++m) {
        State s = sample_state(d, m);
        CHECK(s.rho.min() >= d.margin);
        CHECK(s.theta.min() >= d.margin);
        State again = sample_state(d, m);
        CHECK(sup_state_diff(s, again) == 0.0);
    }
    // different members differ
    CHECK(sup_state_diff(sample_state(d, 0), sample_state(d, 1)) > 1e-3);
}

TEST_CASE("infeasible distribution is reported") {
    DataDistribution d = default_dist();
    d.base_rho = 0.01;  // base below the margin and sigma too small to save it
    d.sigma = 1e-6;
    d.margin = 0.5;
    CHECK_THROWS_AS(sample_state(d, 0), DistributionInfeasible);
}

TEST_CASE("coefficient variance matches the closed-form law") {
    // rho = base + sum_m sigma |m|^{-r} (a_m cos + b_m sin); the orthonormal
    // Fourier coefficient at wavevector m has Re = sigma |m|^{-r} a_m / sqrt(2),
    // so Var(Re) = sigma^2 |m|^{-2r} / 2. Closed form, independent oracle.
    DataDistribution d = default_dist(7);
    d.sigma = 0.05;  // small so rejection never fires and the law is exact
    const int n = 10000;
    double mean = 0.0, m2 = 0.0;
    for (int i = 0; i < n; ++i) {
        State s = sample_state(d, i);
        double re = fourier_coefficient(s, 1, {1, 0, 0}).real();
        double delta = re - mean;
        mean += delta / (i + 1);
        m2 += delta * (re - mean);
    }
    double var = m2 / (n - 1);
    double expected = d.sigma * d.sigma / 2.0;  // |m| = 1
    CHECK(var == doctest::Approx(expected).epsilon(0.05));
    CHECK(std::abs(mean) < 5.0 * d.sigma / std::sqrt(2.0 * n));
}

TEST_CASE("pushforward of a Dirac is the Dirac of the solution") {
    DataDistribution d = default_dist();
    d.sigma = 0.0;
    Parameters p;
    Forcing zero = Forcing::zero(kGrid);
    StoppingConfig stop;
    SolverConfig cfg;
    std::vector<double> times{0.05};
    EnsembleConfig ecfg;
    ecfg.store_members = true;
    EnsembleEstimate est =
        pushforward_estimate(d, zero, p, times, 1, stop, cfg, {}, ecfg);
    Trajectory direct = solve(State::constant(kGrid, 1.0, 1.0), 0.05, p, zero, cfg, &stop);
    REQUIRE(est.members.size() == 1);
    REQUIRE_FALSE(est.members[0][0].is_infinity());
    CHECK(sup_state_diff(est.members[0][0].state(), direct.final_state) == 0.0);
    CHECK(est.blowup_fraction[0] == 0.0);
}

TEST_CASE("censoring identity and monotone blowup fraction") {
    // threshold slightly above the base peak: members with a large initial
    // draw are absorbed at t = 0, the rest stay alive
    DataDistribution d = default_dist(3);
    d.sigma = 0.25;
    d.m_max = 2;
    Parameters p;
    Forcing heat{VectorField::zero(kGrid), ScalarField::constant(kGrid, 2.0)};
    StoppingConfig stop;
    stop.threshold_m = 2.45;
    std::vector<double> times{0.0, 0.1, 0.25};
    std::vector<Observable> obs{make_cutoff_observable(10.0),
                                make_windowed_moment(1, {1, 0, 0}, 4.0)};
    EnsembleEstimate est =
        pushforward_estimate(d, heat, p, times, 64, stop, SolverConfig{}, obs);

    // both populations must be present for the test to mean anything
    CHECK(est.blowup_fraction.front() > 0.0);
    CHECK(est.blowup_fraction.back() < 1.0);
    for (std::size_t i = 1; i < times.size(); ++i)
        CHECK(est.blowup_fraction[i] >= est.blowup_fraction[i - 1]);

    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        for (std::size_t oi = 0; oi < obs.size(); ++oi) {
            double f0 = obs[oi].at_infinity();
            double lhs = est.observable_mean[ti][oi];
            double rhs = est.observable_censored_mean[ti][oi] + f0 * est.blowup_fraction[ti];
            CHECK(std::abs(lhs - rhs) <= 1e-14);
        }
    }
}

TEST_CASE("censored rho moment at t = 0 is the sample mean of initial data") {
    DataDistribution d = default_dist(5);
    Parameters p;
    StoppingConfig stop;
    const int n = 16;
    EnsembleEstimate est = pushforward_estimate(d, Forcing::zero(kGrid), p, {0.0}, n, stop,
                                                SolverConfig{});
    for (std::size_t k = 0; k < kGrid.total_points(); ++k) {
        double expected = detail::pairwise_sum(
                              0, n, [&](std::size_t m) { return sample_state(d, m).rho[k]; }) /
                          n;
        CHECK(est.moment_rho[0][k] == expected);
    }
}

TEST_CASE("results are independent of the worker count") {
    DataDistribution d = default_dist(11);
    Parameters p;
    StoppingConfig stop;
    std::vector<double> times{0.05};
    std::vector<Observable> obs{make_cutoff_observable(10.0)};
    EnsembleConfig one, four;
    one.workers = 1;
    four.workers = 4;
    EnsembleEstimate a =
        pushforward_estimate(d, Forcing::zero(kGrid), p, times, 24, stop, SolverConfig{}, obs, one);
    EnsembleEstimate b =
        pushforward_estimate(d, Forcing::zero(kGrid), p, times, 24, stop, SolverConfig{}, obs, four);
    CHECK(a.observable_mean[0][0] == b.observable_mean[0][0]);
    CHECK(a.observable_half_width[0][0] == b.observable_half_width[0][0]);
    for (std::size_t k = 0; k < kGrid.total_points(); ++k)
        CHECK(a.moment_rho[0][k] == b.moment_rho[0][k]);
}

TEST_CASE("mixture identity with matched substreams") {
    DataDistribution a = default_dist(21);
    DataDistribution b = default_dist(22);
    b.sigma = 0.2;
    Parameters p;
    StoppingConfig stop;
    std::vector<double> times{0.05};
    std::vector<Observable> obs{make_cutoff_observable(10.0)};
    const int n = 32;
    const double lambda = 0.5;

    EnsembleEstimate mixed = pushforward_mixture(a, b, lambda, Forcing::zero(kGrid), p, times, n,
                                                 stop, SolverConfig{}, obs);
    EnsembleEstimate only_a = pushforward_estimate(a, Forcing::zero(kGrid), p, times, n / 2, stop,
                                                   SolverConfig{}, obs);
    EnsembleEstimate only_b = pushforward_estimate(b, Forcing::zero(kGrid), p, times, n / 2, stop,
                                                   SolverConfig{}, obs);
    double combined = lambda * only_a.observable_mean[0][0] +
                      (1.0 - lambda) * only_b.observable_mean[0][0];
    CHECK(mixed.observable_mean[0][0] ==
          doctest::Approx(combined).epsilon(1e-15));

    // lambda = 1 reduces to distribution a alone, bitwise
    EnsembleEstimate all_a = pushforward_mixture(a, b, 1.0, Forcing::zero(kGrid), p, times, n, stop,
                                                 SolverConfig{}, obs);
    EnsembleEstimate plain_a = pushforward_estimate(a, Forcing::zero(kGrid), p, times, n, stop,
                                                    SolverConfig{}, obs);
    CHECK(all_a.observable_mean[0][0] == plain_a.observable_mean[0][0]);
}

TEST_CASE("product-measure identity") {
    DataDistribution d = default_dist(31);
    Parameters p1;
    Parameters p2 = p1;
    p2.mu = 0.2;
    StoppingConfig stop;
    std::vector<double> times{0.05};
    std::vector<Observable> obs{make_cutoff_observable(10.0)};
    const int n = 16;

    EnsembleEstimate agg = pushforward_product_measure(d, Forcing::zero(kGrid), {p1, p2},
                                                       {0.25, 0.75}, times, n, stop, SolverConfig{},
                                                       obs);
    EnsembleEstimate e1 = pushforward_estimate(d, Forcing::zero(kGrid), p1, times, n, stop,
                                               SolverConfig{}, obs);
    EnsembleEstimate e2 = pushforward_estimate(d, Forcing::zero(kGrid), p2, times, n, stop,
                                               SolverConfig{}, obs);
    CHECK(agg.observable_mean[0][0] ==
          0.25 * e1.observable_mean[0][0] + 0.75 * e2.observable_mean[0][0]);
    for (std::size_t k = 0; k < kGrid.total_points(); ++k)
        CHECK(agg.moment_rho[0][k] == 0.25 * e1.moment_rho[0][k] + 0.75 * e2.moment_rho[0][k]);

    CHECK_THROWS_AS(pushforward_product_measure(d, Forcing::zero(kGrid), {p1, p2}, {0.5, 0.6},
                                                times, n, stop, SolverConfig{}, obs),
                    std::invalid_argument);
}

TEST_CASE("slln study: degenerate law has zero error") {
    DataDistribution d = default_dist(41);
    d.sigma = 0.0;
    Parameters p;
    StoppingConfig stop;
    SllnStudy study = slln_convergence_study(d, Forcing::zero(kGrid), p, 0.05, {2, 4, 8}, 2, 1,
                                             stop, SolverConfig{});
    for (double e : study.mean_l1_error) CHECK(e <= 1e-14);
}

TEST_CASE("failed members are censored, not fatal") {
    // a sampler that throws for one member: the ensemble records it as
    // absorbed from the start
    DataDistribution d = default_dist(51);
    StateSampler sampler = [&](std::uint64_t m) -> State {
        if (m == 2) throw std::runtime_error("synthetic member failure");
        return sample_state(d, m);
    };
    Parameters p;
    StoppingConfig stop;
    std::vector<Observable> obs{make_cutoff_observable(10.0)};
    EnsembleEstimate est = ensemble_run(sampler, 4, kGrid, Forcing::zero(kGrid), p, {0.0, 0.05},
                                        stop, SolverConfig{}, obs);
    CHECK(est.blowup_fraction[0] == doctest::Approx(0.25));
    CHECK(est.member_stopping[2].reason == StopReason::NonFinite);
    CHECK(est.member_stopping[2].t_stop == 0.0);
}
