// geomphase.hpp — discrete state paths: Fubini-Study increments, Pancharatnam
// overlap chains, holonomy of closed and open paths, and action-weighted
// pairings of two paths

#pragma once

#include <Eigen/Dense>

#include <vector>

#include "common.hpp"
#include "histories.hpp"

namespace qh::geom {

using Eigen::VectorXcd;
using histories::SystemSpec;
using histories::TimeGrid;

// ---------------------------------- types -----------------------------------

// Unit-norm states sampled along a time grid. Consecutive states must not be
// orthogonal (the overlap chain would lose its phase).
struct StatePath {
    TimeGrid grid;
    std::vector<VectorXcd> states;

    StatePath() = default;
    StatePath(TimeGrid g, std::vector<VectorXcd> psi, double tol = kDefaultTol);

    int size() const { return static_cast<int>(states.size()); }
};

struct FsIncrement {
    double ds2{0.0};              // ||v-u||^2 - |<u|v-u>|^2
    double connection_phase{0.0}; // -arg<u|v>
};

// ------------------------------- operations ----------------------------------

// Metric and connection data for one step. Throws when <u|v> vanishes.
FsIncrement fs_increment(const VectorXcd& u, const VectorXcd& v, double tol = kDefaultTol);

// Overlap chain <psi_1|psi_0><psi_2|psi_1>...<psi_n|psi_{n-1}>, optionally
// closed by the end-to-start factor <psi_0|psi_n>.
cplx pancharatnam_product(const StatePath& path, bool close);

// Accumulated step-phase sum of the (closed) chain, reduced to (-pi, pi].
// Step phases are summed before reduction so no intermediate branch cut is
// crossed. Throws when the closing overlap vanishes.
double berry_phase_open_path(const StatePath& path, double tol = kDefaultTol);

// <bra(.)|S|ket(.)> = <bra_{t0}|ket_{tn}> prod_i <bra_{ti}|ket_{t(i-1)}>.
cplx s_operator_matrix_element(const StatePath& bra, const StatePath& ket);

// i*S accumulated along the path: sum over steps of log<psi_{j+1}|psi_j>
// minus i dt times the trapezoid-averaged energy <psi|H|psi>.
cplx discrete_action(const StatePath& path, const SystemSpec& sys);

// Overlap-weighted pairing of two paths on one grid:
//   <a(t1)|rho(t1)|b(t1)> <b(tn)|a(tn)> exp(i S[a] - i S*[b])
// with rho(t1) the initial state carried to the first instant. Matches the
// projector-history functional built from the same paths as the grid refines.
cplx action_phase_decoherence(const StatePath& a, const StatePath& b, const SystemSpec& sys);

}  // namespace qh::geom
