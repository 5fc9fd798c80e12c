// ctp.cpp — generating functionals, two-route correlators, phase-space chains

#include "ctp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>

#include "hilbert.hpp"
#include "smallmat.hpp"

namespace qh::ctp {

namespace {

constexpr double kTimeMergeTol = 1e-12;

void require_hermitian(const MatrixXcd& op, const SystemSpec& sys, const char* who) {
    if (op.rows() != sys.dim || op.cols() != sys.dim)
        throw std::invalid_argument(std::string(who) + ": operator shape mismatch");
    if (!hilbert::is_hermitian(op, 1e-10))
        throw std::invalid_argument(std::string(who) + ": observable must be Hermitian");
}

MatrixXcd heisenberg_operator(const MatrixXcd& op, double t, const SystemSpec& sys) {
    const MatrixXcd u = sys.evolver().propagator(t);
    return u.adjoint() * op * u;
}

}  // namespace

// ---------------------------------- types -----------------------------------

SmearingVector::SmearingVector(TimeGrid g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid.size())
        throw std::invalid_argument("SmearingVector: one value per grid time required");
    for (double x : values)
        if (!std::isfinite(x))
            throw std::invalid_argument("SmearingVector: values must be finite");
}

CorrelatorRequest::CorrelatorRequest(std::vector<double> plus, std::vector<double> minus)
    : plus_times(std::move(plus)), minus_times(std::move(minus)) {
    const int total = r() + s();
    if (total < 1 || total > 4)
        throw std::invalid_argument("CorrelatorRequest: need 1 to 4 insertions");
    for (const auto* side : {&plus_times, &minus_times}) {
        for (double t : *side)
            if (!std::isfinite(t))
                throw std::invalid_argument("CorrelatorRequest: times must be finite");
        for (std::size_t j = 0; j + 1 < side->size(); ++j)
            if (!((*side)[j] < (*side)[j + 1]))
                throw std::invalid_argument(
                    "CorrelatorRequest: branch times must be strictly increasing");
    }
}

// --------------------------- generating functional ---------------------------

cplx ctp_generating_functional(const MatrixXcd& op, const SmearingVector& j_plus,
                               const SmearingVector& j_minus, const SystemSpec& sys) {
    require_hermitian(op, sys, "ctp_generating_functional");
    if (j_plus.grid.size() != j_minus.grid.size())
        throw std::invalid_argument("ctp_generating_functional: branch grids differ");
    for (int k = 0; k < j_plus.grid.size(); ++k)
        if (std::abs(j_plus.grid.times[k] - j_minus.grid.times[k]) > kTimeMergeTol)
            throw std::invalid_argument("ctp_generating_functional: branch grids differ");

    MatrixXcd chain_p = MatrixXcd::Identity(sys.dim, sys.dim);
    MatrixXcd chain_m = MatrixXcd::Identity(sys.dim, sys.dim);
    for (int k = 0; k < j_plus.grid.size(); ++k) {
        const MatrixXcd a_t = heisenberg_operator(op, j_plus.grid.times[k], sys);
        chain_p = chain_p * hilbert::expm(a_t, -j_plus.values[k]);
        chain_m = chain_m * hilbert::expm(a_t, -j_minus.values[k]);
    }
    return (chain_p.adjoint() * sys.initial_state * chain_m).trace();
}

// -------------------------------- correlators --------------------------------

namespace {

using smallmat::LMatrix;
using smallmat::lcplx;

LMatrix to_lmatrix(const MatrixXcd& m) {
    LMatrix out(static_cast<int>(m.rows()));
    for (int i = 0; i < out.n; ++i)
        for (int j = 0; j < out.n; ++j)
            out.at(i, j) = lcplx(m(i, j).real(), m(i, j).imag());
    return out;
}

LMatrix scaled_exponential(const LMatrix& a, long double factor) {
    LMatrix gen(a.n);
    for (std::size_t k = 0; k < a.a.size(); ++k)
        gen.a[k] = lcplx(0.0L, -factor) * a.a[k];
    return smallmat::expm(gen);
}

struct FdComponent {
    int time_index{0};
    bool plus_branch{false};
    int multiplicity{0};
};

struct Stencil {
    std::vector<int> offsets;
    std::vector<long double> coeffs;
};

const Stencil& stencil_for(int multiplicity) {
    static const Stencil tables[4] = {
        {{-1, 1}, {-0.5L, 0.5L}},
        {{-1, 0, 1}, {1.0L, -2.0L, 1.0L}},
        {{-2, -1, 1, 2}, {-0.5L, 1.0L, -1.0L, 0.5L}},
        {{-2, -1, 0, 1, 2}, {1.0L, -4.0L, 6.0L, -4.0L, 1.0L}}};
    return tables[multiplicity - 1];
}

// Mixed central difference of Z over the listed components at step h.
lcplx mixed_difference(const std::vector<FdComponent>& components,
                       const std::vector<LMatrix>& heis_ops, const LMatrix& rho,
                       long double h) {
    const std::size_t ncomp = components.size();
    std::vector<std::size_t> pick(ncomp, 0);
    int total_order = 0;
    for (const FdComponent& c : components)
        total_order += c.multiplicity;

    lcplx acc = 0.0L;
    while (true) {
        lcplx coeff = 1.0L;
        std::vector<long double> jp(heis_ops.size(), 0.0L), jm(heis_ops.size(), 0.0L);
        for (std::size_t c = 0; c < ncomp; ++c) {
            const Stencil& st = stencil_for(components[c].multiplicity);
            coeff *= st.coeffs[pick[c]];
            const long double val = st.offsets[pick[c]] * h;
            if (components[c].plus_branch)
                jp[components[c].time_index] += val;
            else
                jm[components[c].time_index] += val;
        }
        LMatrix chain_p = LMatrix::identity(rho.n);
        LMatrix chain_m = LMatrix::identity(rho.n);
        for (std::size_t k = 0; k < heis_ops.size(); ++k) {
            if (jp[k] != 0.0L)
                chain_p = smallmat::mul(chain_p, scaled_exponential(heis_ops[k], jp[k]));
            if (jm[k] != 0.0L)
                chain_m = smallmat::mul(chain_m, scaled_exponential(heis_ops[k], jm[k]));
        }
        acc += coeff *
               smallmat::trace(smallmat::mul(smallmat::mul(smallmat::adjoint(chain_p), rho),
                                             chain_m));

        std::size_t c = 0;
        for (; c < ncomp; ++c) {
            const Stencil& st = stencil_for(components[c].multiplicity);
            if (++pick[c] < st.offsets.size())
                break;
            pick[c] = 0;
        }
        if (c == ncomp)
            break;
    }
    return acc / std::pow(h, static_cast<long double>(total_order));
}

}  // namespace

CorrelatorResult correlator(const MatrixXcd& op, const CorrelatorRequest& req,
                            const SystemSpec& sys, const CorrelatorOptions& opt) {
    require_hermitian(op, sys, "correlator");
    if (!(opt.step > 0.0) || !(opt.threshold > 0.0))
        throw std::invalid_argument("correlator: step and threshold must be positive");

    // operator-chain route
    std::vector<double> plus_sorted = req.plus_times;
    std::vector<double> minus_sorted = req.minus_times;
    std::sort(plus_sorted.begin(), plus_sorted.end(), std::greater<double>());
    std::sort(minus_sorted.begin(), minus_sorted.end());
    MatrixXcd left = MatrixXcd::Identity(sys.dim, sys.dim);
    MatrixXcd right = MatrixXcd::Identity(sys.dim, sys.dim);
    for (double t : plus_sorted)
        left = left * heisenberg_operator(op, t, sys);
    for (double t : minus_sorted)
        right = right * heisenberg_operator(op, t, sys);
    const cplx value = (left * sys.initial_state * right).trace();

    // finite-difference route on the distinct insertion times
    std::vector<double> distinct;
    auto index_of = [&distinct](double t) {
        for (std::size_t k = 0; k < distinct.size(); ++k)
            if (std::abs(distinct[k] - t) <= kTimeMergeTol)
                return static_cast<int>(k);
        distinct.push_back(t);
        return static_cast<int>(distinct.size()) - 1;
    };
    std::map<std::pair<int, bool>, int> multiplicity;
    for (double t : req.plus_times)
        ++multiplicity[{index_of(t), true}];
    for (double t : req.minus_times)
        ++multiplicity[{index_of(t), false}];
    std::vector<FdComponent> components;
    for (const auto& [key, mult] : multiplicity)
        components.push_back({key.first, key.second, mult});

    std::vector<LMatrix> heis_ops;
    heis_ops.reserve(distinct.size());
    for (double t : distinct)
        heis_ops.push_back(to_lmatrix(heisenberg_operator(op, t, sys)));
    const LMatrix rho = to_lmatrix(sys.initial_state);

    const long double h = opt.step;
    const lcplx coarse = mixed_difference(components, heis_ops, rho, h);
    const lcplx fine = mixed_difference(components, heis_ops, rho, h / 2.0L);
    lcplx fd = (4.0L * fine - coarse) / 3.0L;

    // (-i)^r i^s against the -i per source in each branch factor
    const lcplx unit_i(0.0L, 1.0L);
    for (int k = 0; k < req.r(); ++k)
        fd *= -unit_i;
    for (int k = 0; k < req.s(); ++k)
        fd *= unit_i;

    CorrelatorResult result;
    result.value = value;
    result.fd_value = cplx(static_cast<double>(fd.real()), static_cast<double>(fd.imag()));
    result.residual = std::abs(result.value - result.fd_value);
    result.step = opt.step;
    if (result.residual > opt.threshold)
        throw std::runtime_error("correlator: finite-difference cross-check exceeded threshold");
    return result;
}

// ------------------------------ phase-space form -----------------------------

cplx phase_space_ctp(const phase::PhasePath& z_plus, const phase::PhasePath& z_minus,
                     const SystemSpec& sys, const phase::FockSpec& spec) {
    if (sys.dim != spec.ncut)
        throw std::invalid_argument("phase_space_ctp: system dimension mismatch");
    if (z_plus.size() != z_minus.size())
        throw std::invalid_argument("phase_space_ctp: branch grids differ");
    for (int k = 0; k < z_plus.size(); ++k)
        if (std::abs(z_plus.grid.times[k] - z_minus.grid.times[k]) > kTimeMergeTol)
            throw std::invalid_argument("phase_space_ctp: branch grids differ");
    for (const auto* path : {&z_plus, &z_minus})
        for (const phase::PhasePoint& pt : path->points)
            if (!phase::in_valid_region(pt, spec))
                throw std::invalid_argument("phase_space_ctp: point outside the valid region");

    MatrixXcd chain_p = MatrixXcd::Identity(sys.dim, sys.dim);
    MatrixXcd chain_m = MatrixXcd::Identity(sys.dim, sys.dim);
    for (int k = 0; k < z_plus.size(); ++k) {
        const MatrixXcd u = sys.evolver().propagator(z_plus.grid.times[k]);
        chain_p = chain_p *
                  (u.adjoint() * phase::displacement(z_plus.points[k], spec).adjoint() * u);
        chain_m = chain_m *
                  (u.adjoint() * phase::displacement(z_minus.points[k], spec).adjoint() * u);
    }
    return (chain_p.adjoint() * sys.initial_state * chain_m).trace();
}

}  // namespace qh::ctp
