// test_ctp.cpp — closed-time-path generating functionals, (r, s) correlators
// with the finite-difference cross-check, and phase-space source branches

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "ctp.hpp"
#include "histories.hpp"
#include "phasespace.hpp"
#include "oracles.hpp"

using namespace qh;
using ctp::CorrelatorOptions;
using ctp::CorrelatorRequest;
using ctp::SmearingVector;
using Eigen::MatrixXcd;
using Eigen::Vector2cd;
using histories::SystemSpec;
using histories::TimeGrid;

namespace {

MatrixXcd pauli_x() {
    MatrixXcd s(2, 2);
    s << 0, 1, 1, 0;
    return s;
}

MatrixXcd pauli_z() {
    MatrixXcd s(2, 2);
    s << 1, 0, 0, -1;
    return s;
}

// 0.45 sigma_z precession with rho = 0.7 |+><+| + 0.3 |0><0|; all (r, s)
// moments of sigma_x(t) then reduce to sines and cosines of 0.9 t.
SystemSpec precession_system() {
    Vector2cd plus;
    plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    Vector2cd zero;
    zero << 1.0, 0.0;
    const MatrixXcd rho =
        0.7 * plus * plus.adjoint() + 0.3 * zero * zero.adjoint();
    return SystemSpec(0.45 * pauli_z(), rho);
}

}  // namespace

TEST_CASE("generating functional normalization and branch symmetry") {
    std::mt19937_64 rng(23);
    const MatrixXcd h = test::random_hermitian(3, rng);
    const SystemSpec sys(h, test::random_density(3, rng));
    const MatrixXcd op = test::random_hermitian(3, rng);
    const TimeGrid grid({0.2, 0.5, 1.0});

    const SmearingVector zero(grid, {0.0, 0.0, 0.0});
    const SmearingVector ja(grid, {0.3, -0.1, 0.4});
    const SmearingVector jb(grid, {0.1, 0.2, -0.3});

    CHECK(std::abs(ctp::ctp_generating_functional(op, zero, zero, sys) - cplx(1.0)) <
          1e-14);
    CHECK(std::abs(ctp::ctp_generating_functional(op, ja, ja, sys) - cplx(1.0)) < 1e-13);

    const cplx zab = ctp::ctp_generating_functional(op, ja, jb, sys);
    const cplx zba = ctp::ctp_generating_functional(op, jb, ja, sys);
    CHECK(std::abs(std::conj(zab) - zba) < 1e-13);

    CHECK_THROWS_AS(SmearingVector(grid, {0.3, -0.1}), std::invalid_argument);
    const SmearingVector other(TimeGrid({0.2, 0.6, 1.0}), {0.1, 0.2, -0.3});
    CHECK_THROWS_AS(ctp::ctp_generating_functional(op, ja, other, sys),
                    std::invalid_argument);
}

TEST_CASE("static observable reduces the functional to a two-phase sum") {
    std::mt19937_64 rng(29);
    const MatrixXcd rho = test::random_density(2, rng);
    const SystemSpec sys(MatrixXcd::Zero(2, 2), rho);
    const TimeGrid grid({0.2, 0.5, 1.0});
    const SmearingVector jp(grid, {0.3, -0.1, 0.4});
    const SmearingVector jm(grid, {0.1, 0.2, -0.3});
    const double ds = (0.3 - 0.1 + 0.4) - (0.1 + 0.2 - 0.3);

    const cplx expected = rho(0, 0) * std::exp(cplx(0.0, ds)) +
                          rho(1, 1) * std::exp(cplx(0.0, -ds));
    CHECK(std::abs(ctp::ctp_generating_functional(pauli_z(), jp, jm, sys) - expected) <
          1e-12);
}

TEST_CASE("correlators of a precessing spin match the trigonometric closed forms") {
    const SystemSpec sys = precession_system();
    const MatrixXcd op = pauli_x();
    const auto value = [&](const CorrelatorRequest& req) {
        const auto res = ctp::correlator(op, req, sys);
        CHECK(res.residual < 1e-5);
        return res.value;
    };

    // one insertion: 0.7 cos(0.9 t) on either branch
    CHECK(std::abs(value({{0.3}, {}}) - cplx(0.7 * std::cos(0.27))) < 1e-12);
    CHECK(std::abs(value({{}, {0.7}}) - cplx(0.7 * std::cos(0.63))) < 1e-12);

    // same-branch pair: cos(0.9 dt) + 0.3 i sin(0.9 dt)
    const cplx g20 = value({{0.3, 0.9}, {}});
    CHECK(std::abs(g20 - cplx(std::cos(0.54), 0.3 * std::sin(0.54))) < 1e-12);
    CHECK(std::abs(value({{}, {0.3, 0.9}}) - std::conj(g20)) < 1e-12);

    // one insertion on each branch at the same times collapses to the pair
    CHECK(std::abs(value({{0.3}, {0.9}}) - g20) < 1e-12);

    // three insertions: both cross terms are real
    const double g21 = std::cos(0.54) * 0.7 * std::cos(0.45) +
                       0.7 * std::sin(0.54) * std::sin(0.45);
    CHECK(std::abs(value({{0.2, 0.8}, {0.5}}) - cplx(g21)) < 1e-12);
    const double g12 = std::cos(0.54) * 0.7 * std::cos(0.18) +
                       0.7 * std::sin(0.54) * std::sin(0.18);
    CHECK(std::abs(value({{0.2}, {0.5, 1.1}}) - cplx(g12)) < 1e-12);

    // swapping the branches conjugates the moment
    CHECK(std::abs(std::conj(value({{0.2, 0.8}, {0.5}})) - value({{0.5}, {0.2, 0.8}})) <
          1e-12);

    // balanced pairs on both branches square to the identity
    CHECK(std::abs(value({{0.2, 0.8}, {0.5, 1.1}}) - cplx(1.0)) < 1e-10);
}

TEST_CASE("correlator validation and the finite-difference guard") {
    const SystemSpec sys = precession_system();
    CHECK_THROWS_AS(CorrelatorRequest({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(CorrelatorRequest({0.1, 0.2, 0.3}, {0.4, 0.5}),
                    std::invalid_argument);
    CHECK_THROWS_AS(CorrelatorRequest({0.6, 0.2}, {}), std::invalid_argument);
    CHECK_THROWS_AS(CorrelatorRequest({0.2, 0.2}, {}), std::invalid_argument);

    CHECK_THROWS_AS(ctp::correlator(pauli_x(), {{0.3, 0.9}, {}}, sys,
                                    CorrelatorOptions{0.8, 1e-5}),
                    std::runtime_error);
    CHECK_THROWS_AS(ctp::correlator(pauli_x(), {{0.3}, {}}, sys,
                                    CorrelatorOptions{-1.0, 1e-5}),
                    std::invalid_argument);
}

TEST_CASE("phase-space branches reduce to scalar sources on the position slice") {
    const phase::FockSpec spec(24, 1.0);
    const phase::PhasePoint center{0.6, -0.4};
    const Eigen::VectorXcd v = phase::coherent_state(center, spec);
    const SystemSpec sys(phase::harmonic_hamiltonian(spec),
                         MatrixXcd(v * v.adjoint()));
    const TimeGrid grid({0.1, 0.4, 0.9});

    // equal branches cancel pairwise
    const phase::PhasePath path(grid, {{0.4, 0.3}, {-0.2, 0.5}, {0.3, -0.1}});
    CHECK(std::abs(ctp::phase_space_ctp(path, path, sys, spec) - cplx(1.0)) < 1e-12);

    // chi = 0 branch factors are exp(-i xi q(t)), a scalar source with J = xi
    const std::vector<double> xi_p = {0.5, -0.2, 0.3};
    const std::vector<double> xi_m = {-0.1, 0.4, 0.2};
    auto slice = [&grid](const std::vector<double>& xs) {
        std::vector<phase::PhasePoint> pts;
        for (double x : xs)
            pts.push_back({0.0, x});
        return phase::PhasePath(grid, pts);
    };
    const cplx lhs = ctp::phase_space_ctp(slice(xi_p), slice(xi_m), sys, spec);
    const cplx rhs = ctp::ctp_generating_functional(
        phase::position(spec), SmearingVector(grid, xi_p), SmearingVector(grid, xi_m),
        sys);
    CHECK(std::abs(lhs - rhs) < 1e-12);

    const phase::PhasePath far(grid, {{9.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}});
    CHECK_THROWS_AS(ctp::phase_space_ctp(far, path, sys, spec), std::invalid_argument);
}
