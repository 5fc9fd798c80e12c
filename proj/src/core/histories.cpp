#include "histories.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qh::histories {

namespace {

constexpr double kGridMergeTol = 1e-12;

bool matrices_close(const MatrixXcd& a, const MatrixXcd& b, double tol) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           (a - b).cwiseAbs().maxCoeff() <= tol;
}

std::vector<double> union_times(const TimeGrid& a, const TimeGrid& b) {
    std::vector<double> all = a.times;
    all.insert(all.end(), b.times.begin(), b.times.end());
    std::sort(all.begin(), all.end());
    std::vector<double> out;
    for (double t : all) {
        if (out.empty() || t - out.back() > kGridMergeTol) out.push_back(t);
    }
    return out;
}

// Proposition re-read on a covering grid, identity on times it omits.
HistoryProposition align_to(const HistoryProposition& h, const std::vector<double>& times,
                            Eigen::Index dim) {
    std::vector<MatrixXcd> ps;
    ps.reserve(times.size());
    std::size_t src = 0;
    for (double t : times) {
        if (src < h.grid.times.size() && std::abs(h.grid.times[src] - t) <= kGridMergeTol) {
            ps.push_back(h.projectors[src]);
            ++src;
        } else {
            ps.push_back(MatrixXcd::Identity(dim, dim));
        }
    }
    if (src != h.grid.times.size()) {
        throw std::invalid_argument("align_to: grid is not contained in the covering grid");
    }
    return HistoryProposition(TimeGrid(times), std::move(ps));
}

MatrixXcd heisenberg(const MatrixXcd& p, double t, const hilbert::Evolver& ev, double sign) {
    MatrixXcd u = ev.propagator(sign * t);
    return u.adjoint() * p * u;
}

// Chain with a selectable sign of the Heisenberg time argument.
MatrixXcd class_operator_signed(const HistoryProposition& h, const SystemSpec& sys, double sign) {
    if (h.projectors.empty()) {
        throw std::invalid_argument("class_operator: proposition has no projectors");
    }
    if (h.projectors.front().rows() != sys.dim) {
        throw std::invalid_argument("class_operator: projector dimension does not match system");
    }
    MatrixXcd c = MatrixXcd::Identity(sys.dim, sys.dim);
    for (std::size_t j = 0; j < h.projectors.size(); ++j) {
        c *= heisenberg(h.projectors[j], h.grid.times[j], sys.evolver(), sign);
    }
    return c;
}

cplx functional_raw(const MatrixXcd& c_a, const MatrixXcd& c_b, const MatrixXcd& rho0,
                    const std::optional<MatrixXcd>& rho_f) {
    MatrixXcd m = c_a.adjoint() * rho0 * c_b;
    if (rho_f) m *= *rho_f;
    return m.trace();
}

}  // namespace

// --------------------------------- types -----------------------------------

TimeGrid::TimeGrid(std::vector<double> ts) : times(std::move(ts)) {
    if (times.empty()) {
        throw std::invalid_argument("TimeGrid: at least one instant required");
    }
    for (std::size_t j = 1; j < times.size(); ++j) {
        if (!(times[j] > times[j - 1])) {
            throw std::invalid_argument("TimeGrid: instants must be strictly increasing");
        }
    }
}

bool TimeGrid::symmetric(double tol) const {
    const std::size_t n = times.size();
    for (std::size_t j = 0; j < n; ++j) {
        if (std::abs(times[j] + times[n - 1 - j]) > tol) return false;
    }
    return true;
}

SystemSpec::SystemSpec(const MatrixXcd& h, const MatrixXcd& rho0, double tol) {
    if (h.rows() != h.cols() || h.rows() == 0) {
        throw std::invalid_argument("SystemSpec: Hamiltonian must be square and nonempty");
    }
    if (!hilbert::is_hermitian(h, tol)) {
        throw std::invalid_argument("SystemSpec: Hamiltonian is not Hermitian within tolerance");
    }
    if (rho0.rows() != h.rows() || rho0.cols() != h.cols()) {
        throw std::invalid_argument("SystemSpec: initial state dimension mismatch");
    }
    hilbert::validate_density(rho0, tol);
    dim = h.rows();
    hamiltonian = h;
    initial_state = rho0;
}

const hilbert::Evolver& SystemSpec::evolver() const {
    if (!evolver_) evolver_.emplace(hamiltonian);
    return *evolver_;
}

HistoryProposition::HistoryProposition(TimeGrid g, std::vector<MatrixXcd> ps, double tol)
    : grid(std::move(g)), projectors(std::move(ps)) {
    if (projectors.size() != grid.times.size()) {
        throw std::invalid_argument("HistoryProposition: one projector per grid time required");
    }
    const Eigen::Index d = projectors.front().rows();
    for (const auto& p : projectors) {
        if (p.rows() != d || p.cols() != d) {
            throw std::invalid_argument("HistoryProposition: projector dimensions disagree");
        }
        if (!hilbert::is_projector(p, tol)) {
            throw std::invalid_argument("HistoryProposition: entry is not a projector within tolerance");
        }
    }
}

// ------------------------------- operations ---------------------------------

MatrixXcd class_operator(const HistoryProposition& h, const SystemSpec& sys) {
    return class_operator_signed(h, sys, 1.0);
}

cplx decoherence_functional(const HistoryProposition& a, const HistoryProposition& b,
                            const SystemSpec& sys) {
    const std::vector<double> times = union_times(a.grid, b.grid);
    const HistoryProposition ua = align_to(a, times, sys.dim);
    const HistoryProposition ub = align_to(b, times, sys.dim);
    return functional_raw(class_operator(ua, sys), class_operator(ub, sys),
                          sys.initial_state, sys.final_weight);
}

Probability history_probability(const HistoryProposition& h, const SystemSpec& sys) {
    const cplx d = decoherence_functional(h, h, sys);
    Probability p;
    p.raw = d.real();
    p.imag_residual = std::abs(d.imag());
    p.value = std::clamp(p.raw, 0.0, 1.0);
    return p;
}

double additivity_defect(const HistoryProposition& a, const HistoryProposition& b,
                         const SystemSpec& sys) {
    const std::vector<double> times = union_times(a.grid, b.grid);
    const HistoryProposition ua = align_to(a, times, sys.dim);
    const HistoryProposition ub = align_to(b, times, sys.dim);

    std::vector<MatrixXcd> joined;
    joined.reserve(times.size());
    bool differs_somewhere = false;
    for (std::size_t j = 0; j < times.size(); ++j) {
        if (matrices_close(ua.projectors[j], ub.projectors[j], kDefaultTol)) {
            joined.push_back(ua.projectors[j]);
        } else {
            differs_somewhere = true;
            MatrixXcd sum = ua.projectors[j] + ub.projectors[j];
            if (!hilbert::is_projector(sum, 1e-8)) {
                throw std::invalid_argument(
                    "additivity_defect: propositions are not orthogonal where they differ");
            }
            joined.push_back(std::move(sum));
        }
    }
    if (!differs_somewhere) {
        throw std::invalid_argument(
            "additivity_defect: propositions must be mutually exclusive");
    }
    const HistoryProposition both(TimeGrid(times), std::move(joined));
    const double p_or = history_probability(both, sys).raw;
    const double p_a = history_probability(ua, sys).raw;
    const double p_b = history_probability(ub, sys).raw;
    return std::abs(p_or - p_a - p_b);
}

ConsistencyReport consistency_check(const std::vector<HistoryProposition>& set,
                                    const SystemSpec& sys, double eps) {
    if (set.size() < 2) {
        throw std::invalid_argument("consistency_check: need at least two histories");
    }
    const TimeGrid& grid = set.front().grid;
    for (const auto& h : set) {
        if (h.grid.times.size() != grid.times.size()) {
            throw std::invalid_argument("consistency_check: histories must share one grid");
        }
        for (std::size_t j = 0; j < grid.times.size(); ++j) {
            if (std::abs(h.grid.times[j] - grid.times[j]) > kGridMergeTol) {
                throw std::invalid_argument("consistency_check: histories must share one grid");
            }
        }
    }

    // Slotwise structure: the distinct projectors used at each time must be
    // mutually orthogonal and resolve the identity.
    for (std::size_t j = 0; j < grid.times.size(); ++j) {
        std::vector<MatrixXcd> distinct;
        for (const auto& h : set) {
            bool seen = false;
            for (const auto& q : distinct) {
                if (matrices_close(h.projectors[j], q, 1e-10)) { seen = true; break; }
            }
            if (!seen) distinct.push_back(h.projectors[j]);
        }
        MatrixXcd sum = MatrixXcd::Zero(sys.dim, sys.dim);
        for (std::size_t u = 0; u < distinct.size(); ++u) {
            sum += distinct[u];
            for (std::size_t v = u + 1; v < distinct.size(); ++v) {
                if ((distinct[u] * distinct[v]).cwiseAbs().maxCoeff() > 1e-8) {
                    throw std::invalid_argument(
                        "consistency_check: alternatives at one time are not mutually orthogonal");
                }
            }
        }
        if (!matrices_close(sum, MatrixXcd::Identity(sys.dim, sys.dim), 1e-8)) {
            throw std::invalid_argument(
                "consistency_check: alternatives at one time do not resolve the identity");
        }
    }

    std::vector<MatrixXcd> chains;
    chains.reserve(set.size());
    MatrixXcd chain_sum = MatrixXcd::Zero(sys.dim, sys.dim);
    for (const auto& h : set) {
        chains.push_back(class_operator(h, sys));
        chain_sum += chains.back();
    }
    for (std::size_t u = 0; u < set.size(); ++u) {
        for (std::size_t v = u + 1; v < set.size(); ++v) {
            if (matrices_close(chains[u], chains[v], 1e-12)) {
                throw std::invalid_argument("consistency_check: duplicate history in family");
            }
        }
    }
    if (!matrices_close(chain_sum, MatrixXcd::Identity(sys.dim, sys.dim), 1e-8)) {
        throw std::invalid_argument("consistency_check: family is not exhaustive");
    }

    const int n = static_cast<int>(set.size());
    ConsistencyReport rep;
    rep.eps = eps;
    rep.d.values = MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            rep.d.values(i, j) = functional_raw(chains[static_cast<std::size_t>(i)],
                                                chains[static_cast<std::size_t>(j)],
                                                sys.initial_state, sys.final_weight);
        }
    }
    rep.d.max_offdiag = 0.0;
    rep.d.diag_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        rep.d.diag_sum += rep.d.values(i, i).real();
        for (int j = 0; j < n; ++j) {
            if (i != j) rep.d.max_offdiag = std::max(rep.d.max_offdiag, std::abs(rep.d.values(i, j)));
        }
    }
    rep.consistent = rep.d.max_offdiag <= eps;
    return rep;
}

// ---------------------------- boundary-trace form ---------------------------

MatrixXcd cyclic_shift(Eigen::Index dim, int nslots) {
    const Eigen::Index total = hilbert::tensor_dim(dim, nslots);
    MatrixXcd s = MatrixXcd::Zero(total, total);
    for (Eigen::Index in = 0; in < total; ++in) {
        // Row-major digits; the last slot moves to the front.
        Eigen::Index rest = in;
        std::vector<Eigen::Index> digit(static_cast<std::size_t>(nslots));
        for (int k = nslots - 1; k >= 0; --k) {
            digit[static_cast<std::size_t>(k)] = rest % dim;
            rest /= dim;
        }
        Eigen::Index out = digit[static_cast<std::size_t>(nslots - 1)];
        for (int k = 0; k + 1 < nslots; ++k) {
            out = out * dim + digit[static_cast<std::size_t>(k)];
        }
        s(out, in) = 1.0;
    }
    return s;
}

MatrixXcd slot_reversal(Eigen::Index dim, int nslots) {
    const Eigen::Index total = hilbert::tensor_dim(dim, nslots);
    MatrixXcd t = MatrixXcd::Zero(total, total);
    for (Eigen::Index in = 0; in < total; ++in) {
        Eigen::Index rest = in;
        std::vector<Eigen::Index> digit(static_cast<std::size_t>(nslots));
        for (int k = nslots - 1; k >= 0; --k) {
            digit[static_cast<std::size_t>(k)] = rest % dim;
            rest /= dim;
        }
        Eigen::Index out = 0;
        for (int k = nslots - 1; k >= 0; --k) {
            out = out * dim + digit[static_cast<std::size_t>(k)];
        }
        t(out, in) = 1.0;
    }
    return t;
}

BoundaryDecomposition boundary_decomposition(const HistoryProposition& a,
                                             const HistoryProposition& b,
                                             const SystemSpec& sys) {
    const MatrixXcd& rho = sys.initial_state;
    if (std::abs((rho * rho).trace().real() - 1.0) > 1e-8) {
        throw std::invalid_argument("boundary_decomposition: initial state must be pure");
    }
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho);
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    const MatrixXcd sqrt_rho =
        es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();

    const std::vector<double> times = union_times(a.grid, b.grid);
    const HistoryProposition ua = align_to(a, times, sys.dim);
    const HistoryProposition ub = align_to(b, times, sys.dim);
    const int n = static_cast<int>(times.size());
    const int nslots = n + 1;
    const Eigen::Index d = sys.dim;
    const Eigen::Index total = hilbert::tensor_dim(d, nslots);
    const MatrixXcd s = cyclic_shift(d, nslots);

    // Slot 0 carries the boundary insertion at the reference instant 0; the
    // remaining slots carry the grid projectors conjugated by the per-slot
    // propagators.
    auto boundary_matrix = [&](const HistoryProposition& h) {
        MatrixXcd heis = MatrixXcd::Identity(d, d);
        for (int j = 0; j < n; ++j) {
            heis = hilbert::tensor(
                heis, heisenberg(h.projectors[static_cast<std::size_t>(j)],
                                 times[static_cast<std::size_t>(j)], sys.evolver(), 1.0));
        }
        const MatrixXcd m = s * heis;

        // Partial trace over slots 1..n leaves the slot-0 block T, and the
        // boundary matrix is c = T sqrt(rho).
        const Eigen::Index block = total / d;
        MatrixXcd t = MatrixXcd::Zero(d, d);
        for (Eigen::Index i = 0; i < d; ++i) {
            for (Eigen::Index k = 0; k < d; ++k) {
                cplx acc = 0.0;
                for (Eigen::Index J = 0; J < block; ++J) {
                    acc += m(i * block + J, k * block + J);
                }
                t(i, k) = acc;
            }
        }
        return MatrixXcd(t * sqrt_rho);
    };

    BoundaryDecomposition out;
    out.c_a = boundary_matrix(ua);
    out.c_b = boundary_matrix(ub);
    out.value = (out.c_a.cwiseProduct(out.c_b.conjugate())).sum();
    return out;
}

// ------------------------------ time reversal -------------------------------

HistoryProposition time_reversal(const HistoryProposition& h, double tol) {
    if (!h.grid.symmetric(tol)) {
        throw std::invalid_argument("time_reversal: grid must be symmetric about 0");
    }
    std::vector<MatrixXcd> rev(h.projectors.rbegin(), h.projectors.rend());
    return HistoryProposition(h.grid, std::move(rev));
}

double reversal_identity_check(const HistoryProposition& a, const HistoryProposition& b,
                               const SystemSpec& sys) {
    const std::vector<double> times = union_times(a.grid, b.grid);
    TimeGrid joint(times);
    if (!joint.symmetric(kDefaultTol)) {
        throw std::invalid_argument("reversal_identity_check: joint grid must be symmetric about 0");
    }
    const HistoryProposition ua = align_to(a, times, sys.dim);
    const HistoryProposition ub = align_to(b, times, sys.dim);

    const cplx rhs = std::conj(functional_raw(class_operator(ua, sys), class_operator(ub, sys),
                                              sys.initial_state, sys.final_weight));

    // Reversed side: mirrored propositions, sign-flipped Heisenberg argument,
    // and the boundary weights exchanged.
    const HistoryProposition ra = time_reversal(ua);
    const HistoryProposition rb = time_reversal(ub);
    const MatrixXcd ca = class_operator_signed(ra, sys, -1.0);
    const MatrixXcd cb = class_operator_signed(rb, sys, -1.0);
    const MatrixXcd rho_i =
        sys.final_weight ? *sys.final_weight : MatrixXcd(MatrixXcd::Identity(sys.dim, sys.dim));
    const cplx lhs = functional_raw(ca, cb, rho_i, sys.initial_state);

    return std::abs(lhs - rhs);
}

}  // namespace qh::histories
