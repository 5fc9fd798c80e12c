// wigner.hpp — phase-space point operators on the truncated Fock space,
// Wigner transforms, trace-pairing checks, the commutator/Poisson comparison,
// and multi-time Wigner pseudo-densities

#pragma once

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <vector>

#include "common.hpp"
#include "histories.hpp"
#include "phasespace.hpp"

namespace qh::wigner {

using Eigen::MatrixXcd;
using phase::FockSpec;
using phase::PhasePoint;

// ---------------------------------- grids -----------------------------------

struct PhaseSpaceGrid {
    std::vector<double> qs, ps;  // node coordinates per axis
    std::vector<double> wq, wp;  // positive quadrature weights per axis

    int nq() const { return static_cast<int>(qs.size()); }
    int np() const { return static_cast<int>(ps.size()); }
    double weight(int i, int j) const { return wq[i] * wp[j]; }
};

// Trapezoid grid on [-r, r]^2; axis weights sum to the side length.
PhaseSpaceGrid make_grid(int nq, int np, double r);

struct WignerField {
    PhaseSpaceGrid grid;
    MatrixXcd values;         // nq x np samples
    double max_imag{0.0};     // largest |Im| encountered
    int out_of_region{0};     // nodes outside the reliable radius
};

// -------------------------------- point operator -----------------------------

// Alternating level weights with the top level halved, so that alternating
// level sums take their inner-limit values on the kept block.
MatrixXcd regularized_parity(const FockSpec& spec);

// 2 D(q,p) P D(q,p)† with the regularized parity P. Unit trace for every
// (q, p). With strict set, a point outside the reliable region throws.
MatrixXcd delta_operator(const PhasePoint& pt, const FockSpec& spec, bool strict = false);

// Point operators precomputed at every grid node, column-major in (i, j).
struct DeltaTable {
    PhaseSpaceGrid grid;
    std::vector<MatrixXcd> ops;
    int out_of_region{0};
};

DeltaTable make_delta_table(const PhaseSpaceGrid& grid, const FockSpec& spec);

// F_A(q, p) = Tr(delta(q, p) A) sampled over the grid.
WignerField wigner_transform(const MatrixXcd& op, const PhaseSpaceGrid& grid,
                             const FockSpec& spec);
WignerField wigner_transform(const MatrixXcd& op, const DeltaTable& table);

// Sum of w F / (2 pi); approximates Tr A.
cplx field_integral(const WignerField& field);
// Sum of w F_A F_B / (2 pi); approximates Tr(A B).
cplx field_pair_integral(const WignerField& a, const WignerField& b);

// Plain table writer: one "q,p,re,im" row per node.
void write_field(const WignerField& field, std::ostream& out);

// --------------------------- commutator vs. bracket --------------------------

struct MoyalReport {
    // coefficients in the basis {1, q, p, q^2, p^2, (qp+pq)/2}
    std::array<double, 6> coeff_a{};
    std::array<double, 6> coeff_b{};
    std::array<double, 6> coeff_commutator{};
    std::array<double, 6> coeff_poisson{};
    double fit_residual{0.0};
    double sup_diff{0.0};  // max node gap inside the reliable region
};

// Requires both inputs to be real polynomials of degree <= 2 in the
// quadratures away from the truncation edge; compares the symbol of [A, B]/i
// against the Poisson bracket of the symbols on the grid.
MoyalReport moyal_consistency_check(const MatrixXcd& a, const MatrixXcd& b,
                                    const PhaseSpaceGrid& grid, const FockSpec& spec);

// ------------------------------ multi-time chains ----------------------------

// Chain of Heisenberg point operators, earliest time leftmost.
MatrixXcd point_operator_chain(const std::vector<double>& times,
                               const std::vector<PhasePoint>& points,
                               const histories::SystemSpec& sys, const FockSpec& spec);

// Tr(chain(a)† rho0 chain(b)); either chain may be empty. At most 3 point
// operators per chain.
cplx multi_time_wigner(const std::vector<double>& times_a,
                       const std::vector<PhasePoint>& points_a,
                       const std::vector<double>& times_b,
                       const std::vector<PhasePoint>& points_b,
                       const histories::SystemSpec& sys, const FockSpec& spec);

// Integrates the earliest a-chain node over the grid (measure dq dp / 2 pi)
// and compares against the chain with that node removed; returns the relative
// gap. times_a lists the full a-chain times, tail_a the a-points after the
// integrated slot.
double marginalization_residual(const std::vector<double>& times_a,
                                const std::vector<PhasePoint>& tail_a,
                                const std::vector<double>& times_b,
                                const std::vector<PhasePoint>& points_b,
                                const histories::SystemSpec& sys, const FockSpec& spec,
                                const PhaseSpaceGrid& grid);

}  // namespace qh::wigner
