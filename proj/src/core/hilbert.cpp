#include "hilbert.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>
#include <string>

namespace qh::hilbert {

// --------------------------------- checks ----------------------------------

bool is_hermitian(const MatrixXcd& a, double tol) {
    if (a.rows() != a.cols()) return false;
    return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_projector(const MatrixXcd& p, double tol) {
    if (!is_hermitian(p, tol)) return false;
    return (p * p - p).cwiseAbs().maxCoeff() <= tol;
}

bool is_unitary(const MatrixXcd& u, double tol) {
    if (u.rows() != u.cols()) return false;
    MatrixXcd id = MatrixXcd::Identity(u.rows(), u.cols());
    return (u.adjoint() * u - id).cwiseAbs().maxCoeff() <= tol;
}

void validate_density(const MatrixXcd& rho, double tol) {
    if (rho.rows() != rho.cols() || rho.rows() == 0) {
        throw std::invalid_argument("validate_density: matrix must be square and nonempty");
    }
    if (!is_hermitian(rho, tol)) {
        throw std::invalid_argument("validate_density: matrix is not Hermitian within tolerance");
    }
    if (!nearly_equal(rho.trace().real(), 1.0, tol) || std::abs(rho.trace().imag()) > tol) {
        throw std::invalid_argument("validate_density: trace is not 1 within tolerance");
    }
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("validate_density: eigenvalue computation failed");
    }
    if (es.eigenvalues().minCoeff() < -tol) {
        throw std::invalid_argument("validate_density: matrix has a negative eigenvalue beyond tolerance");
    }
}

void validate_state(const VectorXcd& psi, double tol) {
    if (psi.size() == 0) {
        throw std::invalid_argument("validate_state: empty vector");
    }
    if (!nearly_equal(psi.norm(), 1.0, tol)) {
        throw std::invalid_argument("validate_state: vector is not unit norm within tolerance");
    }
}

// --------------------------- spectral decomposition -------------------------

Evolver::Evolver(const MatrixXcd& h, double tol) {
    if (h.rows() != h.cols() || h.rows() == 0) {
        throw std::invalid_argument("Evolver: generator must be square and nonempty");
    }
    if (!is_hermitian(h, tol)) {
        throw std::invalid_argument("Evolver: generator is not Hermitian within tolerance");
    }
    Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(h);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("Evolver: eigen decomposition failed");
    }
    dim = h.rows();
    eps = solver.eigenvalues();
    V = solver.eigenvectors();
    V_dag = V.adjoint();
}

MatrixXcd Evolver::propagator(double t) const {
    VectorXcd phases(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        phases(k) = std::exp(cplx(0.0, -eps(k) * t));
    }
    return V * phases.asDiagonal() * V_dag;
}

// ------------------------------ exponentials --------------------------------

MatrixXcd expm(const MatrixXcd& a, double s, double tol) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw std::invalid_argument("expm: matrix must be square and nonempty");
    }
    if (is_hermitian(a, tol)) {
        Evolver ev(a, tol);
        return ev.propagator(-s);
    }
    MatrixXcd g = cplx(0.0, s) * a;
    return g.exp();
}

// ------------------------------- tensor slots -------------------------------

MatrixXcd tensor(const MatrixXcd& a, const MatrixXcd& b) {
    const Eigen::Index ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
    MatrixXcd out(ar * br, ac * bc);
    for (Eigen::Index i = 0; i < ar; ++i) {
        for (Eigen::Index j = 0; j < ac; ++j) {
            out.block(i * br, j * bc, br, bc) = a(i, j) * b;
        }
    }
    return out;
}

Eigen::Index tensor_dim(Eigen::Index dim, int nslots) {
    if (dim < 1 || nslots < 1) {
        throw std::invalid_argument("tensor_dim: dimension and slot count must be positive");
    }
    Eigen::Index total = 1;
    for (int k = 0; k < nslots; ++k) {
        total *= dim;
        if (total > kTensorDimCap) {
            throw cap_error("tensor_dim: product space dimension exceeds cap " +
                            std::to_string(kTensorDimCap));
        }
    }
    return total;
}

MatrixXcd slot_embed(const MatrixXcd& a, int slot, int nslots) {
    if (a.rows() != a.cols()) {
        throw std::invalid_argument("slot_embed: matrix must be square");
    }
    if (slot < 0 || slot >= nslots) {
        throw std::invalid_argument("slot_embed: slot index out of range");
    }
    const Eigen::Index d = a.rows();
    tensor_dim(d, nslots);
    MatrixXcd out = MatrixXcd::Identity(1, 1);
    for (int k = 0; k < nslots; ++k) {
        out = (k == slot) ? tensor(out, a) : tensor(out, MatrixXcd::Identity(d, d));
    }
    return out;
}

MatrixXcd time_averaged_operator(const MatrixXcd& a, const std::vector<double>& f) {
    if (f.empty()) {
        throw std::invalid_argument("time_averaged_operator: weight list is empty");
    }
    const int nslots = static_cast<int>(f.size());
    const Eigen::Index total = tensor_dim(a.rows(), nslots);
    MatrixXcd out = MatrixXcd::Zero(total, total);
    for (int t = 0; t < nslots; ++t) {
        out += f[static_cast<std::size_t>(t)] * slot_embed(a, t, nslots);
    }
    return out;
}

}  // namespace qh::hilbert
