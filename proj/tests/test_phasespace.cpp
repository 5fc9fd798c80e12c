// test_phasespace.cpp — ladder/quadrature structure, Weyl displacement group,
// coherent states and kernels, path functionals, resolution of identity

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "hilbert.hpp"
#include "phasespace.hpp"
#include "oracles.hpp"

using namespace qh;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using phase::FockSpec;
using phase::PhasePath;
using phase::PhasePoint;
using histories::TimeGrid;

namespace {

// classical harmonic orbit z(t) = r e^{i(phase0 - omega t)} as a label path
PhasePath circle_path(double radius, double phase0, double t0, double t1, int n,
                      double omega) {
    std::vector<double> times;
    std::vector<PhasePoint> pts;
    for (int k = 0; k <= n; ++k) {
        const double t = t0 + (t1 - t0) * k / n;
        times.push_back(t);
        const cplx z = radius * std::exp(cplx(0.0, phase0 - omega * t));
        pts.push_back({std::sqrt(2.0 / omega) * z.real(),
                       std::sqrt(2.0 * omega) * z.imag()});
    }
    return PhasePath(TimeGrid(times), pts);
}

}  // namespace

TEST_CASE("ladder and quadrature structure") {
    const FockSpec spec(12, 1.7);
    const MatrixXcd a = phase::annihilation(spec);
    for (int n = 1; n < 12; ++n)
        CHECK(std::abs(a(n - 1, n) - std::sqrt(static_cast<double>(n))) < 1e-14);

    const MatrixXcd comm = a * a.adjoint() - a.adjoint() * a;
    CHECK((comm.topLeftCorner(11, 11) - MatrixXcd::Identity(11, 11)).cwiseAbs().maxCoeff() <
          1e-13);

    const MatrixXcd q = phase::position(spec);
    const MatrixXcd p = phase::momentum(spec);
    CHECK(hilbert::is_hermitian(q));
    CHECK(hilbert::is_hermitian(p));
    const MatrixXcd qp = q * p - p * q;
    CHECK(std::abs(qp(0, 0) - cplx(0.0, 1.0)) < 1e-13);

    const MatrixXcd h = phase::harmonic_hamiltonian(spec);
    CHECK(std::abs(h(0, 0) - 0.5 * 1.7) < 1e-14);
    CHECK(std::abs(h(3, 3) - 3.5 * 1.7) < 1e-14);

    const VectorXcd vac = phase::vacuum(spec);
    CHECK(std::abs(vac(0) - 1.0) < 1e-15);
    CHECK(vac.tail(11).norm() < 1e-15);
}

TEST_CASE("label dictionary and valid region") {
    const FockSpec spec(16, 2.0);
    const cplx z = phase::to_z({1.0, 0.5}, spec);
    CHECK(std::abs(z - cplx(1.0, 0.25)) < 1e-15);

    const FockSpec unit(16, 1.0);
    CHECK(phase::in_valid_region({2.8, 0.0}, unit));  // |z|^2 = 3.92 <= ncut/4 = 4
    CHECK(!phase::in_valid_region({2.9, 0.0}, unit));
}

TEST_CASE("displacement is unitary and matches the closed-form elements") {
    const FockSpec spec(40, 1.1);
    const PhasePoint pt{0.7, -0.5};
    const MatrixXcd d = phase::displacement(pt, spec);
    CHECK(hilbert::is_unitary(d, 1e-12));

    const cplx alpha = phase::to_z(pt, spec);
    for (int m = 0; m < 6; ++m)
        for (int n = 0; n < 6; ++n)
            CHECK(std::abs(d(m, n) - test::displacement_element(m, n, alpha)) < 1e-11);
}

TEST_CASE("displacement group law carries the symplectic cocycle") {
    const FockSpec spec(40, 1.0);
    const PhasePoint p1{0.6, -0.4}, p2{-0.3, 0.8};
    const MatrixXcd lhs = phase::displacement(p1, spec) * phase::displacement(p2, spec);
    const cplx phase_factor =
        std::exp(cplx(0.0, 0.5 * (p1.xi * p2.chi - p2.xi * p1.chi)));
    const MatrixXcd rhs =
        phase_factor * phase::displacement({p1.chi + p2.chi, p1.xi + p2.xi}, spec);
    CHECK((lhs.topLeftCorner(10, 10) - rhs.topLeftCorner(10, 10)).cwiseAbs().maxCoeff() <
          1e-8);
}

TEST_CASE("coherent states match the analytic Fock expansion") {
    const FockSpec spec(40, 1.0);
    const PhasePoint pt{0.9, 0.6};
    const VectorXcd v = phase::coherent_state(pt, spec);
    CHECK(std::abs(v.norm() - 1.0) < 1e-13);

    const cplx z = phase::to_z(pt, spec);
    double fact = 1.0;
    for (int m = 0; m < 9; ++m) {
        if (m > 0)
            fact *= m;
        const cplx expected = std::pow(z, m) * std::exp(-0.5 * std::norm(z)) /
                              std::sqrt(fact);
        CHECK(std::abs(v(m) - expected) < 1e-12);
    }
}

TEST_CASE("overlap and expectation kernels have the closed Gaussian form") {
    const FockSpec spec(48, 1.3);
    const PhasePoint bra{0.8, -0.3}, ket{-0.4, 0.7};
    const cplx za = phase::to_z(bra, spec), zb = phase::to_z(ket, spec);
    const cplx expected = std::exp(cplx(0.0, 0.5 * (bra.chi * ket.xi - bra.xi * ket.chi))) *
                          std::exp(-0.5 * std::norm(zb - za));
    CHECK(std::abs(phase::coherent_overlap(bra, ket, spec) - expected) < 1e-10);

    // xi = 0 slice of the vacuum expectation kernel
    const auto ef = phase::expectation_functional({0.8, 0.0}, spec);
    CHECK(std::abs(ef.k - std::exp(-1.3 * 0.8 * 0.8 / 4.0)) < 1e-12);
    CHECK(std::abs(ef.w - std::log(ef.k)) < 1e-14);
}

TEST_CASE("history overlaps multiply slotwise and reject near-orthogonal slots") {
    const FockSpec spec(32, 1.0);
    const TimeGrid grid({0.0, 0.5, 1.0});
    const PhasePath a(grid, {{0.2, 0.1}, {0.5, -0.2}, {-0.1, 0.4}});
    const PhasePath b(grid, {{-0.3, 0.2}, {0.1, 0.3}, {0.4, -0.5}});

    cplx prod = 1.0;
    for (int t = 0; t < 3; ++t)
        prod *= phase::coherent_overlap(a.points[t], b.points[t], spec);
    CHECK(std::abs(phase::history_overlap(a, b, spec) - prod) < 1e-13);
    CHECK(phase::history_state_distance2(a, a, spec) < 1e-13);

    CHECK_THROWS_AS(phase::history_overlap(a, b, spec, 0.9), std::invalid_argument);
    const PhasePath shorter(TimeGrid({0.0, 0.5}), {{0.2, 0.1}, {0.5, -0.2}});
    CHECK_THROWS_AS(phase::history_overlap(a, shorter, spec), std::invalid_argument);
}

TEST_CASE("label path regularity bound") {
    const FockSpec spec(16, 1.0);
    const PhasePath path(TimeGrid({0.0, 0.1}), {{0.0, 0.0}, {0.3, 0.0}});
    // |dz| = 0.3/sqrt(2) over dt = 0.1
    CHECK(path.lipschitz_bound(spec) ==
          doctest::Approx(0.3 / std::sqrt(2.0) / 0.1).epsilon(1e-12));
}

TEST_CASE("stationary path at the origin accumulates the vacuum energy phase") {
    const FockSpec spec(20, 1.4);
    const MatrixXcd h = phase::harmonic_hamiltonian(spec);
    const PhasePath path(TimeGrid({0.2, 0.7, 1.5}), {{0, 0}, {0, 0}, {0, 0}});
    const cplx w = phase::classical_action(path, h, spec);
    CHECK(std::abs(w - cplx(0.0, -0.5 * 1.4 * 1.3)) < 1e-13);
}

TEST_CASE("action pairing equals the operator functional for a frozen Hamiltonian") {
    const FockSpec spec(24, 1.0);
    const MatrixXcd h = MatrixXcd::Zero(24, 24);
    const TimeGrid grid({0.1, 0.6, 1.0, 1.7});
    const PhasePath a(grid, {{0.3, 0.0}, {0.4, 0.2}, {0.2, 0.5}, {-0.1, 0.3}});
    const PhasePath b(grid, {{0.1, 0.2}, {0.0, 0.4}, {-0.2, 0.3}, {-0.3, 0.1}});
    const cplx op_side = phase::coherent_history_decoherence(a, b, h, spec);
    const cplx ac_side = phase::action_side_decoherence(a, b, h, spec);
    CHECK(std::abs(op_side - ac_side) < 1e-12);
}

TEST_CASE("action pairing converges along classical circles as the grid refines") {
    const FockSpec spec(24, 1.0);
    const MatrixXcd h = phase::harmonic_hamiltonian(spec);
    double previous = 1e300;
    for (int n : {8, 16, 32}) {
        const PhasePath a = circle_path(1.0, 0.0, 0.0, 1.0, n, 1.0);
        const PhasePath b = circle_path(0.9, 0.3, 0.0, 1.0, n, 1.0);
        const cplx dop = phase::coherent_history_decoherence(a, b, h, spec);
        const cplx dac = phase::action_side_decoherence(a, b, h, spec);
        CHECK(std::abs(dop) > 0.3);
        const double gap = std::abs(dop - dac);
        CHECK(gap < previous);
        previous = gap;
    }
    CHECK(previous < 1.5e-2);
}

TEST_CASE("coherent resolution of identity on the low block") {
    double previous = 1e300;
    for (int ncut : {16, 24, 32}) {
        const FockSpec spec(ncut, 1.0);
        const double r = std::sqrt(2.0 * ncut) / 2.0;
        const double defect = phase::resolution_of_identity_defect(spec, 41, 41, r, 2);
        CHECK(defect < previous);
        previous = defect;
    }
    CHECK(previous < 1e-2);

    const FockSpec spec(16, 1.0);
    CHECK_THROWS_AS(phase::resolution_of_identity_defect(spec, 1, 41, 2.0, 2),
                    std::invalid_argument);
    CHECK_THROWS_AS(phase::resolution_of_identity_defect(spec, 41, 41, 2.0, 17),
                    std::invalid_argument);
}
