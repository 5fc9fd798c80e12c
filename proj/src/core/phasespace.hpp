// phasespace.hpp — truncated Fock space: ladder operators, Weyl displacement
// with the (chi, xi) labeling z = sqrt(omega/2) chi + i xi / sqrt(2 omega),
// coherent states, overlap kernels, and coherent path functionals

#pragma once

#include <Eigen/Dense>

#include <vector>

#include "common.hpp"
#include "geomphase.hpp"
#include "histories.hpp"

namespace qh::phase {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using histories::TimeGrid;

// ---------------------------------- types -----------------------------------

struct FockSpec {
    int ncut{0};        // levels kept, >= 2
    double omega{1.0};  // quadrature scale, > 0

    FockSpec() = default;
    FockSpec(int n, double w);
};

// Phase-space label pair.
struct PhasePoint {
    double chi{0.0};
    double xi{0.0};
};

// Label path over a time grid.
struct PhasePath {
    TimeGrid grid;
    std::vector<PhasePoint> points;

    PhasePath() = default;
    PhasePath(TimeGrid g, std::vector<PhasePoint> pts);

    int size() const { return static_cast<int>(points.size()); }
    // max |z_{j+1} - z_j| / dt over steps.
    double lipschitz_bound(const FockSpec& spec) const;
};

// ------------------------------ basic operators ------------------------------

MatrixXcd annihilation(const FockSpec& spec);
MatrixXcd number_operator(const FockSpec& spec);
// q = (a + a†)/sqrt(2 omega), p = i sqrt(omega/2) (a† - a)
MatrixXcd position(const FockSpec& spec);
MatrixXcd momentum(const FockSpec& spec);
// omega (a†a + 1/2)
MatrixXcd harmonic_hamiltonian(const FockSpec& spec);
VectorXcd vacuum(const FockSpec& spec);

cplx to_z(const PhasePoint& pt, const FockSpec& spec);

// |z|^2 <= ncut/4 keeps displaced low-lying states representable.
bool in_valid_region(const PhasePoint& pt, const FockSpec& spec);

// ------------------------------- displacement --------------------------------

// exp(z a† - z* a), unitary to machine precision on the kept levels.
MatrixXcd displacement(const PhasePoint& pt, const FockSpec& spec);

// displacement * vacuum; exactly unit norm.
VectorXcd coherent_state(const PhasePoint& pt, const FockSpec& spec);

cplx coherent_overlap(const PhasePoint& bra, const PhasePoint& ket, const FockSpec& spec);

struct ExpectationFunctional {
    cplx k;  // <0|U(chi, xi)|0>
    cplx w;  // principal log of k
};

ExpectationFunctional expectation_functional(const PhasePoint& pt, const FockSpec& spec);

// ----------------------------- path functionals ------------------------------

// exp of the summed per-time principal logs of <bra_t|ket_t>. Throws when a
// per-time overlap modulus falls below tol.
cplx history_overlap(const PhasePath& bra, const PhasePath& ket, const FockSpec& spec,
                     double tol = 1e-12);

// Squared distance of the slotwise product states, 2(1 - Re history_overlap).
double history_state_distance2(const PhasePath& a, const PhasePath& b, const FockSpec& spec);

// Decoherence functional of the rank-1 coherent projector histories along the
// two paths, with the vacuum as initial state.
cplx coherent_history_decoherence(const PhasePath& a, const PhasePath& b,
                                  const MatrixXcd& hamiltonian, const FockSpec& spec);

// i*S along the coherent path: overlap logs plus trapezoid energy terms.
cplx classical_action(const PhasePath& path, const MatrixXcd& hamiltonian, const FockSpec& spec);

// Endpoint-weighted action pairing exp(iS[a] + conj(iS[b])) including the
// vacuum boundary factors; the grid-refined limit of the operator-side value.
cplx action_side_decoherence(const PhasePath& a, const PhasePath& b,
                             const MatrixXcd& hamiltonian, const FockSpec& spec);

// Quadrature defect of the coherent-state resolution of identity on the
// low-lying block: trapezoid sum of |z><z| dchi dxi / (2 pi) over [-r, r]^2
// with nq x np nodes, compared against the identity on levels < nlow.
double resolution_of_identity_defect(const FockSpec& spec, int nq, int np, double r, int nlow);

}  // namespace qh::phase
