// histories.hpp — projector histories on a time grid, class operators, the
// decoherence functional, consistency checks, and the boundary-trace form

#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "common.hpp"
#include "hilbert.hpp"

namespace qh::histories {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

// --------------------------------- types -----------------------------------

// Strictly increasing instants.
struct TimeGrid {
    std::vector<double> times;

    TimeGrid() = default;
    explicit TimeGrid(std::vector<double> ts);

    int size() const { return static_cast<int>(times.size()); }
    // Mirror-symmetric about 0 within tol.
    bool symmetric(double tol = kDefaultTol) const;
};

// Closed system: Hermitian Hamiltonian, initial density matrix, and an
// optional final weight (identity when absent).
struct SystemSpec {
    Eigen::Index dim{0};
    MatrixXcd hamiltonian;
    MatrixXcd initial_state;
    std::optional<MatrixXcd> final_weight;

    SystemSpec() = default;
    SystemSpec(const MatrixXcd& h, const MatrixXcd& rho0, double tol = kDefaultTol);

    const hilbert::Evolver& evolver() const;

private:
    mutable std::optional<hilbert::Evolver> evolver_;
};

// One projector per grid time.
struct HistoryProposition {
    TimeGrid grid;
    std::vector<MatrixXcd> projectors;

    HistoryProposition() = default;
    HistoryProposition(TimeGrid g, std::vector<MatrixXcd> ps, double tol = kDefaultTol);
};

struct Probability {
    double value{0.0};     // clamped to [0, 1]
    double raw{0.0};       // unclamped real part
    double imag_residual{0.0};
};

struct DecoherenceMatrix {
    MatrixXcd values;
    double max_offdiag{0.0};   // largest off-diagonal modulus
    double diag_sum{0.0};      // sum of diagonal real parts
};

struct ConsistencyReport {
    DecoherenceMatrix d;
    bool consistent{false};
    double eps{0.0};
};

// ------------------------------- operations ---------------------------------

// Heisenberg-picture chain U†(t_1) P_1 U(t_1) ... U†(t_n) P_n U(t_n),
// earliest time leftmost.
MatrixXcd class_operator(const HistoryProposition& h, const SystemSpec& sys);

// Tr(C_a† rho_0 C_b rho_f). Grids may differ; the union grid is used with
// identity projectors filling times a proposition does not mention.
cplx decoherence_functional(const HistoryProposition& a, const HistoryProposition& b,
                            const SystemSpec& sys);

Probability history_probability(const HistoryProposition& h, const SystemSpec& sys);

// |p(a or b) - p(a) - p(b)| for propositions orthogonal where they differ.
// Throws if the slotwise sum fails to be a projector.
double additivity_defect(const HistoryProposition& a, const HistoryProposition& b,
                         const SystemSpec& sys);

// Full pairwise functional for an exclusive, exhaustive family sharing one
// grid. Structural violations throw; they are never reported as consistency.
ConsistencyReport consistency_check(const std::vector<HistoryProposition>& set,
                                    const SystemSpec& sys, double eps);

// ---------------------------- boundary-trace form ---------------------------

// Permutation on an nslots-fold product space sending slot j to j+1 and the
// last slot to the front.
MatrixXcd cyclic_shift(Eigen::Index dim, int nslots);

// Slot-order reversal on an nslots-fold product space.
MatrixXcd slot_reversal(Eigen::Index dim, int nslots);

struct BoundaryDecomposition {
    cplx value;            // d(a, b) assembled through the product space
    MatrixXcd c_a, c_b;    // boundary matrices, value = Tr(c_a c_b†)
};

// Evaluates the functional as a boundary trace: per-slot propagators on an
// (n+1)-slot product space, the cyclic shift, and a square-root insertion of
// the (pure) initial state on slot 0. Requires pure rho_0.
BoundaryDecomposition boundary_decomposition(const HistoryProposition& a,
                                             const HistoryProposition& b,
                                             const SystemSpec& sys);

// ------------------------------ time reversal -------------------------------

// Projector list read against the mirrored grid. Requires a grid symmetric
// about 0.
HistoryProposition time_reversal(const HistoryProposition& h, double tol = kDefaultTol);

// |d(a^T, b^T) - conj(d(a, b))| with the reversed side computed using
// sign-flipped Heisenberg evolution and with the initial and final weights
// exchanged. Requires a symmetric grid; the Hamiltonian carries no time
// dependence by construction.
double reversal_identity_check(const HistoryProposition& a, const HistoryProposition& b,
                               const SystemSpec& sys);

}  // namespace qh::histories
