#include "geomphase.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qh::geom {

namespace {

double reduce_phase(double theta) {
    const double two_pi = 2.0 * std::numbers::pi;
    double r = std::remainder(theta, two_pi);
    if (r <= -std::numbers::pi) r += two_pi;
    return r;
}

}  // namespace

StatePath::StatePath(TimeGrid g, std::vector<VectorXcd> psi, double tol)
    : grid(std::move(g)), states(std::move(psi)) {
    if (states.size() != grid.times.size()) {
        throw std::invalid_argument("StatePath: one state per grid time required");
    }
    for (const auto& s : states) {
        hilbert::validate_state(s, 1e-8);
    }
    for (std::size_t j = 1; j < states.size(); ++j) {
        if (std::abs(states[j].dot(states[j - 1])) <= tol) {
            throw std::invalid_argument("StatePath: consecutive states are orthogonal");
        }
    }
}

FsIncrement fs_increment(const VectorXcd& u, const VectorXcd& v, double tol) {
    if (u.size() != v.size() || u.size() == 0) {
        throw std::invalid_argument("fs_increment: dimension mismatch");
    }
    const cplx uv = u.dot(v);
    if (std::abs(uv) <= tol) {
        throw std::invalid_argument("fs_increment: states are orthogonal");
    }
    FsIncrement out;
    const VectorXcd dv = v - u;
    const double raw = dv.squaredNorm() - std::norm(u.dot(dv));
    out.ds2 = std::max(raw, 0.0);
    out.connection_phase = -std::arg(uv);
    return out;
}

cplx pancharatnam_product(const StatePath& path, bool close) {
    cplx prod = 1.0;
    for (std::size_t j = 1; j < path.states.size(); ++j) {
        prod *= path.states[j].dot(path.states[j - 1]);
    }
    if (close) {
        prod *= path.states.front().dot(path.states.back());
    }
    return prod;
}

double berry_phase_open_path(const StatePath& path, double tol) {
    double theta = 0.0;
    for (std::size_t j = 1; j < path.states.size(); ++j) {
        theta += std::arg(path.states[j].dot(path.states[j - 1]));
    }
    const cplx closing = path.states.front().dot(path.states.back());
    if (std::abs(closing) <= tol) {
        throw std::invalid_argument("berry_phase_open_path: endpoint states are orthogonal");
    }
    theta += std::arg(closing);
    return reduce_phase(theta);
}

cplx s_operator_matrix_element(const StatePath& bra, const StatePath& ket) {
    if (bra.states.size() != ket.states.size()) {
        throw std::invalid_argument("s_operator_matrix_element: paths must share one grid");
    }
    cplx prod = bra.states.front().dot(ket.states.back());
    for (std::size_t j = 1; j < bra.states.size(); ++j) {
        prod *= bra.states[j].dot(ket.states[j - 1]);
    }
    return prod;
}

cplx discrete_action(const StatePath& path, const SystemSpec& sys) {
    if (path.states.front().size() != sys.dim) {
        throw std::invalid_argument("discrete_action: state dimension does not match system");
    }
    cplx is = 0.0;
    for (std::size_t j = 1; j < path.states.size(); ++j) {
        const VectorXcd& prev = path.states[j - 1];
        const VectorXcd& next = path.states[j];
        const double dt = path.grid.times[j] - path.grid.times[j - 1];
        const double e_prev = prev.dot(sys.hamiltonian * prev).real();
        const double e_next = next.dot(sys.hamiltonian * next).real();
        is += std::log(next.dot(prev)) - cplx(0.0, 0.5 * dt * (e_prev + e_next));
    }
    return is;
}

cplx action_phase_decoherence(const StatePath& a, const StatePath& b, const SystemSpec& sys) {
    if (a.states.size() != b.states.size()) {
        throw std::invalid_argument("action_phase_decoherence: paths must share one grid");
    }
    for (std::size_t j = 0; j < a.grid.times.size(); ++j) {
        if (std::abs(a.grid.times[j] - b.grid.times[j]) > 1e-12) {
            throw std::invalid_argument("action_phase_decoherence: paths must share one grid");
        }
    }
    const double t1 = a.grid.times.front();
    const Eigen::MatrixXcd u1 = sys.evolver().propagator(t1);
    const Eigen::MatrixXcd rho_t1 = u1 * sys.initial_state * u1.adjoint();

    const cplx w_a = discrete_action(a, sys);
    const cplx w_b = discrete_action(b, sys);
    const cplx head = a.states.front().dot(rho_t1 * b.states.front());
    const cplx tail = b.states.back().dot(a.states.back());
    return head * tail * std::exp(w_a + std::conj(w_b));
}

}  // namespace qh::geom
