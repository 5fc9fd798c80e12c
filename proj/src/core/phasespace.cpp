// phasespace.cpp — truncated Fock ladder algebra and coherent path functionals

#include "phasespace.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "hilbert.hpp"

namespace qh::phase {

// ---------------------------------- types -----------------------------------

FockSpec::FockSpec(int n, double w) : ncut(n), omega(w) {
    if (ncut < 2)
        throw std::invalid_argument("FockSpec: ncut must be at least 2");
    if (!(omega > 0.0))
        throw std::invalid_argument("FockSpec: omega must be positive");
}

PhasePath::PhasePath(TimeGrid g, std::vector<PhasePoint> pts)
    : grid(std::move(g)), points(std::move(pts)) {
    if (static_cast<int>(points.size()) != grid.size())
        throw std::invalid_argument("PhasePath: one point per grid time required");
}

double PhasePath::lipschitz_bound(const FockSpec& spec) const {
    double bound = 0.0;
    for (std::size_t j = 0; j + 1 < points.size(); ++j) {
        const double dt = grid.times[j + 1] - grid.times[j];
        const double step = std::abs(to_z(points[j + 1], spec) - to_z(points[j], spec));
        bound = std::max(bound, step / dt);
    }
    return bound;
}

// ------------------------------ basic operators ------------------------------

MatrixXcd annihilation(const FockSpec& spec) {
    MatrixXcd a = MatrixXcd::Zero(spec.ncut, spec.ncut);
    for (int n = 1; n < spec.ncut; ++n)
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

MatrixXcd number_operator(const FockSpec& spec) {
    MatrixXcd n = MatrixXcd::Zero(spec.ncut, spec.ncut);
    for (int k = 0; k < spec.ncut; ++k)
        n(k, k) = static_cast<double>(k);
    return n;
}

MatrixXcd position(const FockSpec& spec) {
    const MatrixXcd a = annihilation(spec);
    return (a + a.adjoint()) / std::sqrt(2.0 * spec.omega);
}

MatrixXcd momentum(const FockSpec& spec) {
    const MatrixXcd a = annihilation(spec);
    return cplx(0.0, 1.0) * std::sqrt(spec.omega / 2.0) * (a.adjoint() - a);
}

MatrixXcd harmonic_hamiltonian(const FockSpec& spec) {
    return spec.omega * (number_operator(spec) +
                         0.5 * MatrixXcd::Identity(spec.ncut, spec.ncut));
}

VectorXcd vacuum(const FockSpec& spec) {
    VectorXcd v = VectorXcd::Zero(spec.ncut);
    v(0) = 1.0;
    return v;
}

cplx to_z(const PhasePoint& pt, const FockSpec& spec) {
    return cplx(std::sqrt(spec.omega / 2.0) * pt.chi, pt.xi / std::sqrt(2.0 * spec.omega));
}

bool in_valid_region(const PhasePoint& pt, const FockSpec& spec) {
    return std::norm(to_z(pt, spec)) <= 0.25 * static_cast<double>(spec.ncut);
}

// ------------------------------- displacement --------------------------------

MatrixXcd displacement(const PhasePoint& pt, const FockSpec& spec) {
    const cplx z = to_z(pt, spec);
    const MatrixXcd a = annihilation(spec);
    const MatrixXcd gen = z * a.adjoint() - std::conj(z) * a;
    return hilbert::expm(cplx(0.0, -1.0) * gen, 1.0);
}

VectorXcd coherent_state(const PhasePoint& pt, const FockSpec& spec) {
    return displacement(pt, spec) * vacuum(spec);
}

cplx coherent_overlap(const PhasePoint& bra, const PhasePoint& ket, const FockSpec& spec) {
    return coherent_state(bra, spec).dot(coherent_state(ket, spec));
}

ExpectationFunctional expectation_functional(const PhasePoint& pt, const FockSpec& spec) {
    const VectorXcd vac = vacuum(spec);
    const cplx k = vac.dot(displacement(pt, spec) * vac);
    return {k, std::log(k)};
}

// ----------------------------- path functionals ------------------------------

cplx history_overlap(const PhasePath& bra, const PhasePath& ket, const FockSpec& spec,
                     double tol) {
    if (bra.size() != ket.size())
        throw std::invalid_argument("history_overlap: path lengths differ");
    cplx w = 0.0;
    for (int t = 0; t < bra.size(); ++t) {
        const cplx ov = coherent_state(bra.points[t], spec)
                            .dot(coherent_state(ket.points[t], spec));
        if (std::abs(ov) < tol)
            throw std::invalid_argument("history_overlap: orthogonal pair at a grid time");
        w += std::log(ov);
    }
    return std::exp(w);
}

double history_state_distance2(const PhasePath& a, const PhasePath& b, const FockSpec& spec) {
    return 2.0 * (1.0 - std::real(history_overlap(a, b, spec)));
}

namespace {

histories::SystemSpec vacuum_system(const MatrixXcd& hamiltonian, const FockSpec& spec) {
    const VectorXcd vac = vacuum(spec);
    return histories::SystemSpec(hamiltonian, vac * vac.adjoint());
}

geom::StatePath coherent_path_states(const PhasePath& path, const FockSpec& spec) {
    std::vector<VectorXcd> states;
    states.reserve(path.points.size());
    for (const PhasePoint& pt : path.points)
        states.push_back(coherent_state(pt, spec));
    return geom::StatePath(path.grid, std::move(states));
}

}  // namespace

cplx coherent_history_decoherence(const PhasePath& a, const PhasePath& b,
                                  const MatrixXcd& hamiltonian, const FockSpec& spec) {
    auto rank1 = [&spec](const PhasePath& path) {
        std::vector<MatrixXcd> projectors;
        projectors.reserve(path.points.size());
        for (const PhasePoint& pt : path.points) {
            const VectorXcd v = coherent_state(pt, spec);
            projectors.push_back(v * v.adjoint());
        }
        return histories::HistoryProposition(path.grid, std::move(projectors));
    };
    const histories::SystemSpec sys = vacuum_system(hamiltonian, spec);
    return histories::decoherence_functional(rank1(a), rank1(b), sys);
}

cplx classical_action(const PhasePath& path, const MatrixXcd& hamiltonian, const FockSpec& spec) {
    return geom::discrete_action(coherent_path_states(path, spec),
                                 vacuum_system(hamiltonian, spec));
}

cplx action_side_decoherence(const PhasePath& a, const PhasePath& b,
                             const MatrixXcd& hamiltonian, const FockSpec& spec) {
    return geom::action_phase_decoherence(coherent_path_states(a, spec),
                                          coherent_path_states(b, spec),
                                          vacuum_system(hamiltonian, spec));
}

double resolution_of_identity_defect(const FockSpec& spec, int nq, int np, double r, int nlow) {
    if (nq < 2 || np < 2)
        throw std::invalid_argument("resolution_of_identity_defect: need at least 2 nodes per axis");
    if (nlow < 1 || nlow > spec.ncut)
        throw std::invalid_argument("resolution_of_identity_defect: nlow out of range");
    const double hq = 2.0 * r / (nq - 1);
    const double hp = 2.0 * r / (np - 1);
    MatrixXcd acc = MatrixXcd::Zero(spec.ncut, spec.ncut);
    for (int i = 0; i < nq; ++i) {
        const double wq = (i == 0 || i == nq - 1) ? 0.5 * hq : hq;
        for (int j = 0; j < np; ++j) {
            const double wp = (j == 0 || j == np - 1) ? 0.5 * hp : hp;
            const VectorXcd v = coherent_state({-r + i * hq, -r + j * hp}, spec);
            acc += (wq * wp / (2.0 * M_PI)) * (v * v.adjoint());
        }
    }
    acc -= MatrixXcd::Identity(spec.ncut, spec.ncut);
    return acc.leftCols(nlow).jacobiSvd().singularValues()(0);
}

}  // namespace qh::phase
