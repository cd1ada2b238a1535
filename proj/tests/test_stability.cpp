#include <catch_amalgamated.hpp>

#include <random>

#include "support/oracles.hpp"
#include "vstab/stability.hpp"

using namespace vstab;
using Catch::Matchers::WithinAbs;

namespace {

ReducedJacobian at_solution(const RadialNetwork& net, const IncidenceSet& inc,
                            const SystemParameters& params, SystemState& state_out) {
    const auto out = solve(net, inc, params);
    REQUIRE(out.converged);
    state_out = *out.state;
    return reduced_jacobian(net, inc, state_out, params.v0);
}

ReducedJacobian split(Eigen::MatrixXd m) {
    ReducedJacobian J;
    J.full = std::move(m);
    J.diag = J.full.diagonal();
    J.off = J.full;
    J.off.diagonal().setZero();
    return J;
}

}  // namespace

TEST_CASE("indices vanish at the flat solution", "[stability]") {
    std::mt19937 rng(71);
    const auto net = oracles::random_network(rng, 6);
    const auto inc = incidence(net);
    const auto J = reduced_jacobian(net, inc, SystemState::flat(6), 1.0);

    CHECK(vsi(J) == 0.0);
    CHECK(vsia(J.diag) == 0.0);
    CHECK(spectral_radius(J) == 0.0);
    CHECK(trace_error(J) == 0.0);

    const auto flags = region_check(J);
    CHECK(flags.det_positive);
    CHECK(flags.diag_positive);
    CHECK(flags.rho_lt_one);
    CHECK(flags.z_matrix);
}

TEST_CASE("single line index equals the closed form", "[stability]") {
    const auto net = RadialNetwork::build({{0, 1, 0.1, 0.0}}, 1);
    const auto inc = incidence(net);
    SystemParameters params;
    params.p = Eigen::VectorXd::Constant(1, 1.0);
    params.q = Eigen::VectorXd::Zero(1);
    SystemState u;
    const auto J = at_solution(net, inc, params, u);

    // ln sqrt(1 - 4 r p1) = ln sqrt(0.6)
    CHECK_THAT(vsi(J), WithinAbs(-0.2554128118829953, 1e-10));
    CHECK_THAT(vsia(J.diag), WithinAbs(vsi(J), 1e-15));  // n = 1: no off-diagonal part
    CHECK(spectral_radius(J) == 0.0);
    CHECK(trace_error(J) == 0.0);
}

TEST_CASE("vsi demands a positive determinant", "[stability]") {
    auto J = split(Eigen::MatrixXd::Identity(2, 2));
    J.full(0, 0) = -1.0;
    J.diag[0] = -1.0;
    CHECK_THROWS_AS(vsi(J), Error);

    auto Jz = split(Eigen::MatrixXd::Zero(1, 1));
    try {
        vsi(Jz);
        FAIL("expected OutsideRegion");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::OutsideRegion);
    }
}

TEST_CASE("vsia is the arithmetic mean of the log diagonal", "[stability]") {
    Eigen::VectorXd d(2);
    d << 0.9, 0.8;
    CHECK_THAT(vsia(d), WithinAbs(-0.164252, 1e-6));
    CHECK_THAT(vsia(d), WithinAbs((std::log(0.9) + std::log(0.8)) / 2.0, 1e-16));

    std::mt19937 rng(73);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd diag = Eigen::VectorXd::Random(12).array().abs() + 0.1;
        double mean = 0.0;
        for (int i = 0; i < diag.size(); ++i) mean += std::log(diag[i]);
        mean /= static_cast<double>(diag.size());
        CHECK_THAT(vsia(diag), WithinAbs(mean, 1e-14));
    }

    Eigen::VectorXd bad(2);
    bad << 0.5, -0.1;
    CHECK_THROWS_AS(vsia(bad), Error);
}

TEST_CASE("spectral radius matches a dense eigensolve", "[stability]") {
    std::mt19937 rng(79);
    for (int trial = 0; trial < 12; ++trial) {
        const int n = std::uniform_int_distribution<int>(2, 20)(rng);
        const auto s = oracles::solved_random_case(rng, n, 0.08);
        const auto J = reduced_jacobian(s.net, s.inc, s.state, s.params.v0);

        const Eigen::MatrixXd M = J.diag.cwiseInverse().asDiagonal() * J.off;
        const double rho_dense = oracles::dense_spectral_radius(M);
        CHECK_THAT(spectral_radius(J), WithinAbs(rho_dense, 1e-8));
    }
}

TEST_CASE("error bounds from the documented arithmetic", "[stability]") {
    CHECK(error_bounds(0.0, 4) == std::pair{0.0, 0.0});

    const auto [l1, t1] = error_bounds(0.5, 2);
    CHECK_THAT(l1, WithinAbs(0.346574, 1e-6));
    CHECK_THAT(t1, WithinAbs(0.173287, 1e-6));

    const auto [l2, t2] = error_bounds(0.9, 55);
    CHECK_THAT(l2, WithinAbs(2.072327, 1e-6));
    CHECK_THAT(t2, WithinAbs(0.037679, 1e-6));

    CHECK_THROWS_AS(error_bounds(1.0, 3), Error);
    CHECK_THROWS_AS(error_bounds(-0.1, 3), Error);
}

TEST_CASE("trace series reproduces the observed approximation error", "[stability]") {
    const auto net = RadialNetwork::build({{0, 1, 0.1, 0.05}, {1, 2, 0.2, 0.1}}, 2);
    const auto inc = incidence(net);
    SystemParameters params;
    params.p = Eigen::VectorXd::Constant(2, 0.4);
    params.q = Eigen::VectorXd::Constant(2, 0.15);
    SystemState u;
    const auto J = at_solution(net, inc, params, u);

    const double gap = vsia(J.diag) - vsi(J);
    CHECK(gap > 0.0);
    CHECK_THAT(trace_error(J, 100), WithinAbs(gap, 1e-8));

    const double rho = spectral_radius(J);
    const double tail = trace_error_tail_bound(rho, 2, 100);
    CHECK(std::abs(trace_error(J, 100) - gap) <= tail + 1e-15);
}

TEST_CASE("theorem sandwich holds at random in-region states", "[stability]") {
    std::mt19937 rng(83);
    for (int trial = 0; trial < 12; ++trial) {
        const int n = std::uniform_int_distribution<int>(2, 16)(rng);
        const auto s = oracles::solved_random_case(rng, n, 0.07);
        const auto J = reduced_jacobian(s.net, s.inc, s.state, s.params.v0);

        const double lo = vsi(J), hi = vsia(J.diag);
        const double rho = spectral_radius(J);
        REQUIRE(rho < 1.0);
        const auto [loose, tight] = error_bounds(rho, n);
        CHECK(lo <= hi + 1e-12);
        CHECK(hi - lo <= loose + 1e-12);
        // conjectured bound: observed but never enforced
        INFO("conjecture margin " << tight - (hi - lo));
    }
}

TEST_CASE("region flags track constructed defects", "[stability]") {
    auto healthy = split((Eigen::MatrixXd(2, 2) << 0.9, -0.1, -0.05, 0.8).finished());
    const auto f1 = region_check(healthy);
    CHECK(f1.det_positive);
    CHECK(f1.diag_positive);
    CHECK(f1.rho_lt_one);
    CHECK(f1.z_matrix);

    auto negdiag = split((Eigen::MatrixXd(2, 2) << -0.2, -0.1, -0.05, 0.8).finished());
    const auto f2 = region_check(negdiag);
    CHECK_FALSE(f2.diag_positive);
    CHECK_FALSE(f2.det_positive);  // LU sign tracks the negative determinant

    auto posoff = split((Eigen::MatrixXd(2, 2) << 0.9, 0.2, -0.05, 0.8).finished());
    CHECK_FALSE(region_check(posoff).z_matrix);

    // near the transfer limit the determinant stays positive
    const auto net = RadialNetwork::build({{0, 1, 0.1, 0.0}}, 1);
    const auto inc = incidence(net);
    SystemParameters params;
    params.p = Eigen::VectorXd::Constant(1, 2.4);
    params.q = Eigen::VectorXd::Zero(1);
    SystemState u;
    const auto J = at_solution(net, inc, params, u);
    const auto f3 = region_check(J);
    CHECK(f3.det_positive);
    CHECK(f3.diag_positive);
    CHECK_THAT(J.diag[0], WithinAbs(std::sqrt(1.0 - 0.96), 1e-9));
}

TEST_CASE("assess composes the full report", "[stability]") {
    const auto net = RadialNetwork::build({{0, 1, 0.1, 0.05}, {1, 2, 0.2, 0.1}}, 2);
    const auto inc = incidence(net);

    SECTION("flat") {
        const auto params = SystemParameters::zero_load(2);
        const auto rep = assess(net, inc, SystemState::flat(2), params);
        CHECK(rep.vsi == 0.0);
        CHECK(rep.vsia == 0.0);
        CHECK(rep.rho == 0.0);
        CHECK(rep.bound_loose == 0.0);
        CHECK(rep.bound_tight == 0.0);
        CHECK(rep.in_region);
        CHECK(rep.assumption1_satisfied);
    }

    SECTION("moderate chain load keeps the sandwich") {
        SystemParameters params;
        params.p = Eigen::VectorXd::Constant(2, 0.4);
        params.q = Eigen::VectorXd::Constant(2, 0.15);
        const auto out = solve(net, inc, params);
        REQUIRE(out.converged);
        const auto rep = assess(net, inc, *out.state, params);
        CHECK(rep.in_region);
        CHECK(rep.vsi <= rep.vsia);
        CHECK(rep.vsia - rep.vsi <= rep.bound_loose + 1e-12);
        CHECK(rep.rho > 0.0);
        CHECK(rep.rho < 1.0);
        CHECK_THAT(rep.trace_error, WithinAbs(rep.vsia - rep.vsi, 1e-8));
        CHECK(rep.flags.z_matrix);
    }

    SECTION("single line at p1 = 1") {
        const auto single = RadialNetwork::build({{0, 1, 0.1, 0.0}}, 1);
        const auto sinc = incidence(single);
        SystemParameters params;
        params.p = Eigen::VectorXd::Constant(1, 1.0);
        params.q = Eigen::VectorXd::Zero(1);
        const auto out = solve(single, sinc, params);
        REQUIRE(out.converged);
        const auto rep = assess(single, sinc, *out.state, params);
        CHECK_THAT(rep.vsi, WithinAbs(-0.2554128118829953, 1e-9));
        CHECK_THAT(rep.vsia, WithinAbs(rep.vsi, 1e-15));
        CHECK(rep.rho == 0.0);
    }

    SECTION("negative demand clears the assumption flag") {
        SystemParameters params;
        params.p = (Eigen::VectorXd(2) << 0.3, -0.1).finished();
        params.q = Eigen::VectorXd::Zero(2);
        const auto out = solve(net, inc, params);
        REQUIRE(out.converged);
        const auto rep = assess(net, inc, *out.state, params);
        CHECK_FALSE(rep.assumption1_satisfied);
        CHECK(rep.in_region);
    }
}
