// test_stochlimit.cpp — Gaussian effect operators, smeared decoherence and its
// commuting-observable oracle, onset sweeps, extracted probabilities,
// Kolmogorov coarsening residuals, and the classical generating functional

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "hilbert.hpp"
#include "histories.hpp"
#include "phasespace.hpp"
#include "stochlimit.hpp"
#include "oracles.hpp"

using namespace qh;
using Eigen::MatrixXcd;
using Eigen::Vector2cd;
using Eigen::VectorXd;
using histories::SystemSpec;
using histories::TimeGrid;
using stoch::SmearedHistorySet;

namespace {

// observable and state diagonal in one random frame, so every smeared pairing
// reduces to the classical transfer sum over eigenvalues
struct CommutingBed {
    MatrixXcd a;
    MatrixXcd rho;
    std::vector<double> eigenvalues{-1.5, -0.5, 0.5, 1.5};
    std::vector<double> weights{0.4, 0.3, 0.2, 0.1};

    CommutingBed() {
        std::mt19937_64 rng(94);
        const MatrixXcd w = test::random_unitary(4, rng);
        Eigen::VectorXcd lam(4), wt(4);
        for (int i = 0; i < 4; ++i) {
            lam(i) = eigenvalues[i];
            wt(i) = weights[i];
        }
        a = w * lam.asDiagonal() * w.adjoint();
        rho = w * wt.asDiagonal() * w.adjoint();
    }
};

// all sign tuples over the grid with centers drawn from {-1, +1}
std::vector<std::vector<double>> sign_cells(int times) {
    std::vector<std::vector<double>> cells(1);
    for (int t = 0; t < times; ++t) {
        std::vector<std::vector<double>> next;
        for (const auto& cell : cells)
            for (double c : {1.0, -1.0}) {
                auto grown = cell;
                grown.push_back(c);
                next.push_back(grown);
            }
        cells = next;
    }
    return cells;
}

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

// half-rotation spin testbed: all onset statistics close in q = exp(-2/sqrt(V))
SmearedHistorySet spin_flip_set(double v) {
    return SmearedHistorySet(TimeGrid({0.0, 1.0}), pauli_z(), v, sign_cells(2));
}

SystemSpec spin_flip_system() {
    Vector2cd zero;
    zero << 1.0, 0.0;
    return SystemSpec(M_PI / 4.0 * pauli_x(), MatrixXcd(zero * zero.adjoint()));
}

}  // namespace

TEST_CASE("Gaussian effect operators act on the observable spectrum") {
    const MatrixXcd g0 = stoch::gaussian_pos_operator(0.0, 1.0, pauli_z());
    CHECK(std::abs(g0(0, 0) - std::exp(-0.5)) < 1e-14);
    CHECK(std::abs(g0(1, 1) - std::exp(-0.5)) < 1e-14);
    CHECK(std::abs(g0(0, 1)) < 1e-14);

    const MatrixXcd g1 = stoch::gaussian_pos_operator(1.0, 1.0, pauli_z());
    CHECK(std::abs(g1(0, 0) - 1.0) < 1e-14);
    CHECK(std::abs(g1(1, 1) - std::exp(-2.0)) < 1e-14);

    std::mt19937_64 rng(5);
    const MatrixXcd a = test::random_hermitian(4, rng);
    const MatrixXcd narrow = stoch::gaussian_pos_operator(0.3, 0.5, a);
    const MatrixXcd wide = stoch::gaussian_pos_operator(0.3, 2.0, a);
    CHECK(hilbert::is_hermitian(narrow, 1e-12));
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(wide - narrow);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);  // wider Gaussians dominate
    Eigen::SelfAdjointEigenSolver<MatrixXcd> en(narrow);
    CHECK(en.eigenvalues().minCoeff() > 0.0);
    CHECK(en.eigenvalues().maxCoeff() < 1.0 + 1e-12);

    CHECK_THROWS_AS(stoch::gaussian_pos_operator(0.0, -1.0, a), std::invalid_argument);
}

TEST_CASE("coherent cell operators are displaced number Gaussians") {
    const phase::FockSpec spec(24, 1.0);
    const MatrixXcd at_origin = stoch::coherent_cell_operator({0.0, 0.0}, 4.0, spec);
    CHECK(std::abs(at_origin(0, 0) - 1.0) < 1e-13);
    CHECK(std::abs(at_origin(1, 1) - std::exp(-0.25)) < 1e-13);
    CHECK(std::abs(at_origin(0, 1)) < 1e-14);

    const MatrixXcd shifted = stoch::coherent_cell_operator({0.8, -0.5}, 4.0, spec);
    CHECK(hilbert::is_hermitian(shifted, 1e-12));
    CHECK(std::abs(shifted.trace() - at_origin.trace()) < 1e-10);
}

TEST_CASE("effect chains order Heisenberg factors earliest leftmost") {
    std::mt19937_64 rng(17);
    const MatrixXcd h = test::random_hermitian(3, rng);
    const SystemSpec sys(h, test::random_density(3, rng));
    const MatrixXcd e1 = stoch::gaussian_pos_operator(0.4, 1.0, test::random_hermitian(3, rng));
    const MatrixXcd e2 = stoch::gaussian_pos_operator(-0.2, 2.0, test::random_hermitian(3, rng));

    const MatrixXcd u1 = test::expm_series(h, -0.3);
    const MatrixXcd u2 = test::expm_series(h, -0.8);
    const MatrixXcd expected =
        u1.adjoint() * e1 * u1 * u2.adjoint() * e2 * u2;
    const MatrixXcd chain = stoch::effect_chain(TimeGrid({0.3, 0.8}), {e1, e2}, sys);
    CHECK((chain - expected).cwiseAbs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(stoch::effect_chain(TimeGrid({0.3, 0.8}), {e1}, sys),
                    std::invalid_argument);
}

TEST_CASE("effect decoherence matrices are Hermitian with nonnegative diagonal") {
    std::mt19937_64 rng(31);
    const MatrixXcd h = test::random_hermitian(3, rng);
    const SystemSpec sys(h, test::random_density(3, rng));
    const TimeGrid grid({0.2, 0.9});
    std::vector<std::vector<MatrixXcd>> family;
    for (int i = 0; i < 3; ++i)
        family.push_back({stoch::gaussian_pos_operator(0.4 * i - 0.5, 1.0,
                                                       test::random_hermitian(3, rng)),
                          stoch::gaussian_pos_operator(0.2 * i, 2.0,
                                                       test::random_hermitian(3, rng))});
    const auto d = stoch::effect_decoherence_matrix(grid, family, sys);
    CHECK((d.values - d.values.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    for (int i = 0; i < 3; ++i) {
        CHECK(d.values(i, i).real() > -1e-12);
        CHECK(std::abs(d.values(i, i).imag()) < 1e-13);
    }
}

TEST_CASE("commuting observables reduce to the classical transfer sum") {
    const CommutingBed bed;
    const TimeGrid grid({0.0, 1.0});
    const std::vector<double> ca = {0.5, -1.0}, cb = {-0.5, 0.3};

    for (double v : {0.7, 2.5}) {
        const SystemSpec free_sys(MatrixXcd::Zero(4, 4), bed.rho);
        const cplx d = stoch::smeared_decoherence(grid, ca, cb, v, bed.a, free_sys);
        const double oracle = test::transfer_matrix_smeared(bed.weights, bed.eigenvalues,
                                                            ca, cb, v);
        CHECK(std::abs(d - cplx(oracle)) < 1e-12);

        // a Hamiltonian that is a polynomial in the observable drops out
        const MatrixXcd h = 0.7 * bed.a + 0.2 * bed.a * bed.a;
        const SystemSpec com_sys(h, bed.rho);
        CHECK(std::abs(stoch::smeared_decoherence(grid, ca, cb, v, bed.a, com_sys) -
                       cplx(oracle)) < 1e-12);
    }
}

TEST_CASE("smeared matrix entries agree with the pairwise functional") {
    const CommutingBed bed;
    std::mt19937_64 rng(40);
    const SystemSpec sys(MatrixXcd(0.3 * test::random_hermitian(4, rng)), bed.rho);
    const SmearedHistorySet set(TimeGrid({0.0, 1.0}), bed.a, 1.5, sign_cells(2));
    const auto d = stoch::smeared_decoherence_matrix(set, sys);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const cplx direct = stoch::smeared_decoherence(
                set.grid, set.cells[i], set.cells[j], set.v, set.observable, sys);
            CHECK(std::abs(d.values(i, j) - direct) < 1e-13);
        }
}

TEST_CASE("spin-flip onset statistics close in the single overlap parameter") {
    const SystemSpec sys = spin_flip_system();
    const std::vector<double> sweep = {0.5, 1.0, 2.0, 4.0, 8.0};
    const auto rows = stoch::decoherence_onset(spin_flip_set(1.0), sweep, sys);
    REQUIRE(rows.size() == 5);

    double prev_ratio = 1e300;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double q = std::exp(-2.0 / std::sqrt(sweep[i]));
        CHECK(rows[i].v == doctest::Approx(sweep[i]));
        CHECK(std::abs(rows[i].max_offdiag - q) < 1e-10);
        CHECK(std::abs(rows[i].diag_geomean - q * (1.0 + q * q) / 2.0) < 1e-10);
        CHECK(std::abs(rows[i].ratio - 2.0 / (1.0 + q * q)) < 1e-10);
        CHECK(rows[i].ratio < prev_ratio);
        prev_ratio = rows[i].ratio;
    }
    CHECK(std::abs(rows[0].ratio - 1.993037) < 1e-5);
    CHECK(std::abs(rows[4].ratio - 1.608859) < 1e-5);
    CHECK(std::abs(rows[1].max_offdiag - 0.135335) < 1e-5);

    CHECK_THROWS_AS(stoch::decoherence_onset(spin_flip_set(1.0), {1.0, -2.0}, sys),
                    std::invalid_argument);
}

TEST_CASE("extracted probabilities scale the diagonal and flag weak decoherence") {
    // coherent regime: the spin-flip bed stays far above threshold
    const auto weak = stoch::extracted_probabilities(spin_flip_set(1.0),
                                                     spin_flip_system());
    CHECK(weak.approximate);
    CHECK(weak.onset_ratio > 1.9);
    const double q = std::exp(-2.0);
    const std::vector<double> diag = {(1.0 + q * q) / 2.0, (1.0 + q * q) / 2.0,
                                      q * q * (1.0 + q * q) / 2.0,
                                      q * q * (1.0 + q * q) / 2.0};
    REQUIRE(weak.raw.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(weak.raw[i] - diag[i]) < 1e-10);
        CHECK(std::abs(weak.values[i] - diag[i]) < 1e-10);  // V = 1 scale
    }

    // decohered regime: static observable, mixed diagonal state, tiny width
    Vector2cd zero, one;
    zero << 1.0, 0.0;
    one << 0.0, 1.0;
    const MatrixXcd rho = 0.6 * zero * zero.adjoint() + 0.4 * one * one.adjoint();
    const SystemSpec still(MatrixXcd::Zero(2, 2), rho);
    const SmearedHistorySet set(TimeGrid({0.0, 1.0}), pauli_z(), 0.01,
                                {{1.0, 1.0}, {-1.0, -1.0}});
    const auto sharp = stoch::extracted_probabilities(set, still);
    CHECK(!sharp.approximate);
    CHECK(sharp.onset_ratio < 1e-6);
    CHECK(sharp.values[0] / sharp.values[1] == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(std::abs(sharp.raw[0] + sharp.raw[1] - 1.0) < 1e-8);
    CHECK(std::abs(sharp.normalization - (sharp.values[0] + sharp.values[1])) < 1e-12);
}

TEST_CASE("coarsening the final partition obeys the overlap bound") {
    const CommutingBed bed;
    const SystemSpec sys(MatrixXcd::Zero(4, 4), bed.rho);
    std::vector<std::vector<double>> cells;
    for (double first : {-1.0, 1.0})
        for (double last : {-1.8, -0.6, 0.6, 1.8})
            cells.push_back({first, last});

    double prev_residual = 1e300, prev_defect = 1e300;
    for (double v : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        const SmearedHistorySet set(TimeGrid({0.0, 1.0}), bed.a, v, cells);
        const auto report = stoch::kolmogorov_residual(set, sys, 2);
        CHECK(report.coarse_factor == 2);
        CHECK(report.residual <= report.overlap_defect + 1e-12);
        CHECK(report.residual < prev_residual);
        CHECK(report.overlap_defect < prev_defect);
        prev_residual = report.residual;
        prev_defect = report.overlap_defect;
    }
    CHECK(prev_residual < 0.02);

    const SmearedHistorySet grouped(TimeGrid({0.0, 1.0}), bed.a, 1.0, cells);
    CHECK_THROWS_AS(stoch::kolmogorov_residual(grouped, sys, 3), std::invalid_argument);
    auto broken = cells;
    broken.pop_back();
    const SmearedHistorySet partial(TimeGrid({0.0, 1.0}), bed.a, 1.0, broken);
    CHECK_THROWS_AS(stoch::kolmogorov_residual(partial, sys, 2), std::invalid_argument);
    CHECK_THROWS_AS(stoch::kolmogorov_residual(grouped, sys, 1), std::invalid_argument);
}

TEST_CASE("classical generating functional sums scaled cell weights") {
    const CommutingBed bed;
    const SystemSpec sys(MatrixXcd::Zero(4, 4), bed.rho);
    const SmearedHistorySet set(TimeGrid({0.0, 1.0}), bed.a, 0.8, sign_cells(2));

    const auto p = stoch::extracted_probabilities(set, sys);
    const cplx z0 = stoch::classical_generating_functional(set, sys, {0.0, 0.0});
    CHECK(std::abs(z0 - cplx(p.normalization)) < 1e-12);

    // oracle: classical transfer sum per cell, phase-weighted
    const std::vector<double> source = {0.7, -0.4};
    cplx expected = 0.0;
    for (const auto& cell : set.cells) {
        const double w = test::transfer_matrix_smeared(bed.weights, bed.eigenvalues,
                                                       cell, cell, set.v);
        expected += w / std::pow(set.v, 2) *
                    std::exp(cplx(0.0, cell[0] * source[0] + cell[1] * source[1]));
    }
    const cplx z = stoch::classical_generating_functional(set, sys, source);
    CHECK(std::abs(z - expected) < 1e-12);

    CHECK_THROWS_AS(stoch::classical_generating_functional(set, sys, {0.0}),
                    std::invalid_argument);
}
