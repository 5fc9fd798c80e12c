// hilbert.hpp — finite-dimensional operators: validation, tensor slots,
// unitary exponentials, and time-averaged slot sums

#pragma once

#include <Eigen/Dense>

#include <vector>

#include "common.hpp"

namespace qh::hilbert {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// --------------------------------- checks ----------------------------------

bool is_hermitian(const MatrixXcd& a, double tol = kDefaultTol);

// Hermitian and idempotent within tol.
bool is_projector(const MatrixXcd& p, double tol = kDefaultTol);

bool is_unitary(const MatrixXcd& u, double tol = kDefaultTol);

// Throws std::invalid_argument unless rho is Hermitian, positive
// semidefinite (eigenvalues >= -tol), and has unit trace within tol.
void validate_density(const MatrixXcd& rho, double tol = kDefaultTol);

// Throws std::invalid_argument unless psi has unit norm within tol.
void validate_state(const VectorXcd& psi, double tol = kDefaultTol);

// --------------------------- spectral decomposition -------------------------

// Cached eigensystem of a Hermitian generator; produces e^{-iHt} on demand.
struct Evolver {
    Eigen::Index dim{0};
    VectorXd eps;        // eigenvalues (ascending)
    MatrixXcd V;         // eigenvectors (columns)
    MatrixXcd V_dag;

    Evolver() = default;
    explicit Evolver(const MatrixXcd& h, double tol = kDefaultTol);

    // e^{-i h t}
    MatrixXcd propagator(double t) const;
};

// ------------------------------ exponentials --------------------------------

// e^{i a s}. Hermitian a (within tol) goes through the eigensystem and the
// result is unitary to machine precision; other square matrices fall back to
// a general matrix exponential with no unitarity guarantee.
MatrixXcd expm(const MatrixXcd& a, double s, double tol = kDefaultTol);

// ------------------------------- tensor slots -------------------------------

// Kronecker product, row-major slot order (a owns the slower index).
MatrixXcd tensor(const MatrixXcd& a, const MatrixXcd& b);

// a acting on one slot of an nslots-fold product space, identity elsewhere.
// Throws cap_error when dim^nslots exceeds the tensor-space cap.
MatrixXcd slot_embed(const MatrixXcd& a, int slot, int nslots);

// Sum over slots f[t] * a_t on the nslots-fold product space, nslots = f.size().
// Satisfies e^{i A_f s} = prod_t e^{i a f[t] s} slotwise for Hermitian a.
MatrixXcd time_averaged_operator(const MatrixXcd& a, const std::vector<double>& f);

// dim^nslots with the cap enforced.
Eigen::Index tensor_dim(Eigen::Index dim, int nslots);

}  // namespace qh::hilbert
