// Copyright (c) 2026 the nsfstat authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nsf/metric.hpp"
#include "nsf/statistics.hpp"

using namespace nsf;

namespace {

const Grid kGrid(1, 16);

ExtendedState random_extended(std::mt19937_64& rng, double p_infinity = 0.2) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < p_infinity) return ExtendedState::infinity();
    DataDistribution dist{kGrid};
    dist.sigma = 0.2;
    dist.m_max = 3;
    dist.seed = rng();
    return ExtendedState::regular(sample_state(dist, 0));
}

}  // namespace

TEST_CASE("G weight") {
    CHECK(G_weight(ExtendedState::infinity()) == 0.0);

    State c = State::constant(kGrid, 1.0, 1.0);
    ExtendedState u = ExtendedState::regular(c);
    double g = G_weight(u);
    CHECK(g > 0.0);
    CHECK(g <= 1.0);
    // composition oracle: G = (1 + x_norm + 1/min rho + 1/min theta)^{-2}
    PhaseNorms n = sobolev_norm_X(c);
    double base = 1.0 + n.x_norm + n.inv_rho_sup + n.inv_theta_sup;
    CHECK(g == doctest::Approx(1.0 / (base * base)).epsilon(1e-14));

    // adding mass to the norm strictly decreases G
    State bigger = State::constant(kGrid, 1.0, 1.0);
    ScalarField bump = ScalarField::sample(
        kGrid, [](const std::array<double, 3>& x) { return 0.5 * std::cos(M_PI * x[0]); });
    ExtendedState v = ExtendedState::regular(State{bigger.rho + bump + 1.0, bigger.theta, bigger.u});
    CHECK(G_weight(v) < g);

    // non-positive density is outside X+ and gets weight 0
    State neg{ScalarField::constant(kGrid, -1.0), ScalarField::constant(kGrid, 1.0),
              VectorField::zero(kGrid)};
    CHECK(G_weight(ExtendedState::regular(neg)) == 0.0);
}

TEST_CASE("metric axioms on random triples") {
    std::mt19937_64 rng(42);
    MetricConfig cfg;
    for (int trial = 0; trial < 200; ++trial) {
        ExtendedState a = random_extended(rng);
        ExtendedState b = random_extended(rng);
        ExtendedState c = random_extended(rng);
        double dab = metric_d(a, b, cfg);
        double dba = metric_d(b, a, cfg);
        double dac = metric_d(a, c, cfg);
        double dcb = metric_d(c, b, cfg);
        CHECK(dab >= 0.0);
        CHECK(dab == dba);
        CHECK(dab <= dac + dcb + 1e-12);
        CHECK(metric_d(a, a, cfg) == 0.0);
    }
}

TEST_CASE("identity of indiscernibles") {
    std::mt19937_64 rng(9);
    ExtendedState a = random_extended(rng, 0.0);
    // a tiny but visible perturbation must register
    ScalarField bump = ScalarField::sample(
        kGrid, [](const std::array<double, 3>& x) { return 1e-6 * std::cos(M_PI * x[0]); });
    ExtendedState b = ExtendedState::regular(
        State{a.state().rho + bump, a.state().theta, a.state().u});
    CHECK(metric_d(a, b) > 1e-12);
    CHECK(metric_d(a, ExtendedState::infinity()) > 0.0);
}

TEST_CASE("distance to Infinity vanishes along a norm-growing ray") {
    double prev = std::numeric_limits<double>::infinity();
    for (double amp : {1.0, 10.0, 100.0, 1000.0}) {
        ScalarField mode = ScalarField::sample(
            kGrid, [amp](const std::array<double, 3>& x) { return amp * std::cos(M_PI * x[0]); });
        State s{ScalarField::constant(kGrid, 1.0), ScalarField::constant(kGrid, 1.0) + mode + amp,
                VectorField::zero(kGrid)};
        double d = metric_d(ExtendedState::regular(s), ExtendedState::infinity());
        CHECK(d < prev);
        prev = d;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("grid mismatch is rejected") {
    ExtendedState a = ExtendedState::regular(State::constant(Grid(1, 16), 1.0, 1.0));
    ExtendedState b = ExtendedState::regular(State::constant(Grid(1, 32), 1.0, 1.0));
    CHECK_THROWS_AS(metric_d(a, b), GridMismatch);
}

TEST_CASE("truncation tail bound") {
    std::mt19937_64 rng(17);
    MetricConfig k4{4, 6.0};
    MetricConfig k8{8, 6.0};
    double bound = truncation_tail_bound(kGrid.dim, 4, 8);
    CHECK(bound < 0.2);
    for (int trial = 0; trial < 50; ++trial) {
        ExtendedState a = random_extended(rng);
        ExtendedState b = random_extended(rng);
        double d4 = metric_d(a, b, k4);
        double d8 = metric_d(a, b, k8);
        CHECK(std::abs(d4 - d8) <= bound + 1e-14);
    }
}

TEST_CASE("convergence classification") {
    ExtendedState u = ExtendedState::regular(State::constant(kGrid, 1.0, 1.0));
    std::vector<ExtendedState> constant_seq(8, u);
    CHECK(convergence_mode(constant_seq, u) == ConvergenceMode::InXPlus);

    std::vector<ExtendedState> growing;
    for (int n = 1; n <= 12; ++n) {
        double amp = std::pow(2.0, n);
        ScalarField mode = ScalarField::sample(
            kGrid, [amp](const std::array<double, 3>& x) { return amp * std::cos(M_PI * x[0]); });
        growing.push_back(ExtendedState::regular(State{ScalarField::constant(kGrid, 1.0),
                                                       ScalarField::constant(kGrid, 1.0) + mode + amp,
                                                       VectorField::zero(kGrid)}));
    }
    CHECK(convergence_mode(growing, ExtendedState::infinity()) == ConvergenceMode::ToInfinity);

    ExtendedState v = ExtendedState::regular(State::constant(kGrid, 2.0, 1.0));
    std::vector<ExtendedState> alternating;
    for (int i = 0; i < 10; ++i) alternating.push_back(i % 2 == 0 ? u : v);
    CHECK(convergence_mode(alternating, u) == ConvergenceMode::NotConvergent);
}

TEST_CASE("cutoff observable") {
    Observable f = make_cutoff_observable(5.0);
    CHECK(f.at_infinity() == 0.0);
    CHECK_THROWS_AS(make_cutoff_observable(0.5), std::invalid_argument);

    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        ExtendedState u = random_extended(rng);
        double v = f(u);
        CHECK(std::abs(v) <= f.bound);
    }

    // below the cutoff the observable equals the raw norm sum
    State c = State::constant(kGrid, 1.0, 1.0);
    PhaseNorms n = sobolev_norm_X(c);
    double y = n.x_norm + n.inv_rho_sup + n.inv_theta_sup;
    REQUIRE(y <= 5.0);
    CHECK(f(ExtendedState::regular(c)) == doctest::Approx(y).epsilon(1e-14));

    // far above the cutoff the value decays toward F(Infinity) = 0
    ScalarField mode = ScalarField::sample(
        kGrid, [](const std::array<double, 3>& x) { return 100.0 * std::cos(M_PI * x[0]); });
    State big{ScalarField::constant(kGrid, 1.0), ScalarField::constant(kGrid, 1.0) + mode + 100.0,
              VectorField::zero(kGrid)};
    CHECK(f(ExtendedState::regular(big)) < 1e-6);
}

TEST_CASE("windowed moment observable") {
    Observable f = make_windowed_moment(1, {0, 0, 0}, 10.0);
    CHECK(f.at_infinity() == 0.0);

    State c = State::constant(kGrid, 1.0, 1.0);
    ExtendedState u = ExtendedState::regular(c);
    // in the linear range: value = G(U) * coefficient = G * 2^{dim/2}
    double expected = G_weight(u) * std::sqrt(2.0);
    CHECK(f(u) == doctest::Approx(expected).epsilon(1e-6));

    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        ExtendedState s = random_extended(rng);
        CHECK(std::abs(f(s)) <= f.bound);
    }
    CHECK_THROWS_AS(make_windowed_moment(1, {0, 0, 0}, 0.0), std::invalid_argument);
}
