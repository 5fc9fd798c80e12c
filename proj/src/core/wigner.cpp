// wigner.cpp — point operators, transforms, and multi-time pseudo-densities

#include "wigner.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "hilbert.hpp"

namespace qh::wigner {

// ---------------------------------- grids -----------------------------------

PhaseSpaceGrid make_grid(int nq, int np, double r) {
    if (nq < 8 || np < 8)
        throw std::invalid_argument("make_grid: need at least 8 nodes per axis");
    if (!(r > 0.0))
        throw std::invalid_argument("make_grid: radius must be positive");
    PhaseSpaceGrid g;
    const double hq = 2.0 * r / (nq - 1);
    const double hp = 2.0 * r / (np - 1);
    for (int i = 0; i < nq; ++i) {
        g.qs.push_back(-r + i * hq);
        g.wq.push_back((i == 0 || i == nq - 1) ? 0.5 * hq : hq);
    }
    for (int j = 0; j < np; ++j) {
        g.ps.push_back(-r + j * hp);
        g.wp.push_back((j == 0 || j == np - 1) ? 0.5 * hp : hp);
    }
    return g;
}

// -------------------------------- point operator -----------------------------

MatrixXcd regularized_parity(const FockSpec& spec) {
    MatrixXcd p = MatrixXcd::Zero(spec.ncut, spec.ncut);
    for (int n = 0; n < spec.ncut; ++n)
        p(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
    p(spec.ncut - 1, spec.ncut - 1) *= 0.5;
    return p;
}

MatrixXcd delta_operator(const PhasePoint& pt, const FockSpec& spec, bool strict) {
    if (strict && !phase::in_valid_region(pt, spec))
        throw std::invalid_argument("delta_operator: point outside the reliable region");
    const MatrixXcd d = phase::displacement(pt, spec);
    return 2.0 * d * regularized_parity(spec) * d.adjoint();
}

DeltaTable make_delta_table(const PhaseSpaceGrid& grid, const FockSpec& spec) {
    DeltaTable table;
    table.grid = grid;
    table.ops.reserve(static_cast<std::size_t>(grid.nq()) * grid.np());
    for (int j = 0; j < grid.np(); ++j) {
        for (int i = 0; i < grid.nq(); ++i) {
            const PhasePoint pt{grid.qs[i], grid.ps[j]};
            if (!phase::in_valid_region(pt, spec))
                ++table.out_of_region;
            table.ops.push_back(delta_operator(pt, spec));
        }
    }
    return table;
}

WignerField wigner_transform(const MatrixXcd& op, const DeltaTable& table) {
    const int nq = table.grid.nq();
    const int np = table.grid.np();
    WignerField field;
    field.grid = table.grid;
    field.values.resize(nq, np);
    field.out_of_region = table.out_of_region;
    for (int j = 0; j < np; ++j) {
        for (int i = 0; i < nq; ++i) {
            const cplx f = (table.ops[static_cast<std::size_t>(j) * nq + i] * op).trace();
            field.values(i, j) = f;
            field.max_imag = std::max(field.max_imag, std::abs(std::imag(f)));
        }
    }
    return field;
}

WignerField wigner_transform(const MatrixXcd& op, const PhaseSpaceGrid& grid,
                             const FockSpec& spec) {
    return wigner_transform(op, make_delta_table(grid, spec));
}

cplx field_integral(const WignerField& field) {
    cplx acc = 0.0;
    for (int j = 0; j < field.grid.np(); ++j)
        for (int i = 0; i < field.grid.nq(); ++i)
            acc += field.grid.weight(i, j) * field.values(i, j);
    return acc / (2.0 * M_PI);
}

cplx field_pair_integral(const WignerField& a, const WignerField& b) {
    if (a.grid.nq() != b.grid.nq() || a.grid.np() != b.grid.np())
        throw std::invalid_argument("field_pair_integral: grid shapes differ");
    cplx acc = 0.0;
    for (int j = 0; j < a.grid.np(); ++j)
        for (int i = 0; i < a.grid.nq(); ++i)
            acc += a.grid.weight(i, j) * a.values(i, j) * b.values(i, j);
    return acc / (2.0 * M_PI);
}

void write_field(const WignerField& field, std::ostream& out) {
    out << "q,p,re,im\n";
    char row[128];
    for (int j = 0; j < field.grid.np(); ++j) {
        for (int i = 0; i < field.grid.nq(); ++i) {
            const cplx f = field.values(i, j);
            std::snprintf(row, sizeof(row), "%.17g,%.17g,%.17g,%.17g\n",
                          field.grid.qs[i], field.grid.ps[j], std::real(f), std::imag(f));
            out << row;
        }
    }
}

// --------------------------- commutator vs. bracket --------------------------

namespace {

std::vector<MatrixXcd> quadratic_basis(const FockSpec& spec) {
    const MatrixXcd q = phase::position(spec);
    const MatrixXcd p = phase::momentum(spec);
    return {MatrixXcd::Identity(spec.ncut, spec.ncut), q, p,
            q * q, p * p, 0.5 * (q * p + p * q)};
}

// Least-squares coefficients over the block away from the truncation edge.
std::array<double, 6> fit_block_coefficients(const MatrixXcd& op,
                                             const std::vector<MatrixXcd>& basis,
                                             int block, double* residual) {
    const int m = block * block;
    Eigen::MatrixXd sys(2 * m, 6);
    Eigen::VectorXd rhs(2 * m);
    for (int c = 0; c < 6; ++c) {
        const MatrixXcd blk = basis[c].topLeftCorner(block, block);
        for (int k = 0; k < m; ++k) {
            sys(k, c) = std::real(blk(k % block, k / block));
            sys(m + k, c) = std::imag(blk(k % block, k / block));
        }
    }
    const MatrixXcd target = op.topLeftCorner(block, block);
    for (int k = 0; k < m; ++k) {
        rhs(k) = std::real(target(k % block, k / block));
        rhs(m + k) = std::imag(target(k % block, k / block));
    }
    const Eigen::VectorXd sol = sys.colPivHouseholderQr().solve(rhs);
    *residual = (sys * sol - rhs).cwiseAbs().maxCoeff();
    std::array<double, 6> out{};
    for (int c = 0; c < 6; ++c)
        out[c] = sol(c);
    return out;
}

double evaluate_quadratic(const std::array<double, 6>& c, double q, double p) {
    return c[0] + c[1] * q + c[2] * p + c[3] * q * q + c[4] * p * p + c[5] * q * p;
}

std::array<double, 6> poisson_bracket(const std::array<double, 6>& f,
                                      const std::array<double, 6>& g) {
    // df/dq = a1 + b1 q + c1 p, dg/dp = a2 + b2 p + c2 q
    const double a1 = f[1], b1 = 2.0 * f[3], c1 = f[5];
    const double a2 = g[2], b2 = 2.0 * g[4], c2 = g[5];
    // df/dp = a3 + b3 p + c3 q, dg/dq = a4 + b4 q + c4 p
    const double a3 = f[2], b3 = 2.0 * f[4], c3 = f[5];
    const double a4 = g[1], b4 = 2.0 * g[3], c4 = g[5];
    std::array<double, 6> out{};
    out[0] = a1 * a2 - a3 * a4;
    out[1] = (a1 * c2 + b1 * a2) - (a3 * b4 + c3 * a4);
    out[2] = (a1 * b2 + c1 * a2) - (a3 * c4 + b3 * a4);
    out[3] = b1 * c2 - c3 * b4;
    out[4] = c1 * b2 - b3 * c4;
    out[5] = (b1 * b2 + c1 * c2) - (b3 * b4 + c3 * c4);
    return out;
}

}  // namespace

MoyalReport moyal_consistency_check(const MatrixXcd& a, const MatrixXcd& b,
                                    const PhaseSpaceGrid& grid, const FockSpec& spec) {
    if (spec.ncut < 8)
        throw std::invalid_argument("moyal_consistency_check: ncut must be at least 8");
    if (a.rows() != spec.ncut || a.cols() != spec.ncut ||
        b.rows() != spec.ncut || b.cols() != spec.ncut)
        throw std::invalid_argument("moyal_consistency_check: operator shape mismatch");
    const int block = spec.ncut - 4;
    const std::vector<MatrixXcd> basis = quadratic_basis(spec);

    MoyalReport report;
    double ra = 0.0, rb = 0.0, rc = 0.0;
    report.coeff_a = fit_block_coefficients(a, basis, block, &ra);
    report.coeff_b = fit_block_coefficients(b, basis, block, &rb);
    const MatrixXcd comm = cplx(0.0, -1.0) * (a * b - b * a);
    report.coeff_commutator = fit_block_coefficients(comm, basis, block, &rc);
    report.fit_residual = std::max({ra, rb, rc});
    if (report.fit_residual > 1e-8)
        throw std::invalid_argument(
            "moyal_consistency_check: inputs are not quadratic polynomials away from the edge");

    report.coeff_poisson = poisson_bracket(report.coeff_a, report.coeff_b);
    for (int i = 0; i < grid.nq(); ++i) {
        for (int j = 0; j < grid.np(); ++j) {
            const PhasePoint pt{grid.qs[i], grid.ps[j]};
            if (!phase::in_valid_region(pt, spec))
                continue;
            const double gap =
                std::abs(evaluate_quadratic(report.coeff_commutator, pt.chi, pt.xi) -
                         evaluate_quadratic(report.coeff_poisson, pt.chi, pt.xi));
            report.sup_diff = std::max(report.sup_diff, gap);
        }
    }
    return report;
}

// ------------------------------ multi-time chains ----------------------------

MatrixXcd point_operator_chain(const std::vector<double>& times,
                               const std::vector<PhasePoint>& points,
                               const histories::SystemSpec& sys, const FockSpec& spec) {
    if (times.size() != points.size())
        throw std::invalid_argument("point_operator_chain: times and points differ in length");
    if (times.size() > 3)
        throw std::invalid_argument("point_operator_chain: at most 3 point operators");
    if (sys.dim != spec.ncut)
        throw std::invalid_argument("point_operator_chain: system dimension mismatch");
    for (std::size_t j = 0; j + 1 < times.size(); ++j)
        if (!(times[j] < times[j + 1]))
            throw std::invalid_argument("point_operator_chain: times must be increasing");

    MatrixXcd chain = MatrixXcd::Identity(spec.ncut, spec.ncut);
    for (std::size_t j = 0; j < times.size(); ++j) {
        const MatrixXcd u = sys.evolver().propagator(times[j]);
        chain = chain * (u.adjoint() * delta_operator(points[j], spec, true) * u);
    }
    return chain;
}

cplx multi_time_wigner(const std::vector<double>& times_a,
                       const std::vector<PhasePoint>& points_a,
                       const std::vector<double>& times_b,
                       const std::vector<PhasePoint>& points_b,
                       const histories::SystemSpec& sys, const FockSpec& spec) {
    const MatrixXcd ca = point_operator_chain(times_a, points_a, sys, spec);
    const MatrixXcd cb = point_operator_chain(times_b, points_b, sys, spec);
    return (ca.adjoint() * sys.initial_state * cb).trace();
}

double marginalization_residual(const std::vector<double>& times_a,
                                const std::vector<PhasePoint>& tail_a,
                                const std::vector<double>& times_b,
                                const std::vector<PhasePoint>& points_b,
                                const histories::SystemSpec& sys, const FockSpec& spec,
                                const PhaseSpaceGrid& grid) {
    if (times_a.size() != tail_a.size() + 1)
        throw std::invalid_argument(
            "marginalization_residual: need exactly one more a-time than tail points");
    for (std::size_t j = 0; j + 1 < times_a.size(); ++j)
        if (!(times_a[j] < times_a[j + 1]))
            throw std::invalid_argument("marginalization_residual: a-times must be increasing");

    const std::vector<double> tail_times(times_a.begin() + 1, times_a.end());
    const MatrixXcd rest = point_operator_chain(tail_times, tail_a, sys, spec);
    const MatrixXcd cb = point_operator_chain(times_b, points_b, sys, spec);
    const cplx direct = (rest.adjoint() * sys.initial_state * cb).trace();
    if (std::abs(direct) < 1e-9)
        throw std::invalid_argument(
            "marginalization_residual: reference value too small for a relative residual");

    // W(x1) = Tr(rest† d1_H rho0 cb) = Tr(delta(x1) u1 (rho0 cb rest†) u1†)
    const MatrixXcd u1 = sys.evolver().propagator(times_a.front());
    const MatrixXcd kernel =
        u1 * (sys.initial_state * cb * rest.adjoint()) * u1.adjoint();
    cplx marginal = 0.0;
    for (int i = 0; i < grid.nq(); ++i)
        for (int j = 0; j < grid.np(); ++j)
            marginal += grid.weight(i, j) *
                        (delta_operator({grid.qs[i], grid.ps[j]}, spec) * kernel).trace();
    marginal /= 2.0 * M_PI;
    return std::abs(marginal - direct) / std::abs(direct);
}

}  // namespace qh::wigner
