// ctp.hpp — closed-time-path generating functionals and (r, s) correlation
// functions at discrete times, evaluated through single-copy operator chains

#pragma once

#include <Eigen/Dense>

#include <vector>

#include "common.hpp"
#include "histories.hpp"
#include "phasespace.hpp"

namespace qh::ctp {

using Eigen::MatrixXcd;
using histories::SystemSpec;
using histories::TimeGrid;

// ---------------------------------- types -----------------------------------

// One real source value per grid time for a single branch.
struct SmearingVector {
    TimeGrid grid;
    std::vector<double> values;

    SmearingVector(TimeGrid g, std::vector<double> v);
};

// Insertion times per branch, strictly increasing within each branch;
// r = plus count, s = minus count, 1 <= r+s <= 4.
struct CorrelatorRequest {
    std::vector<double> plus_times;
    std::vector<double> minus_times;

    CorrelatorRequest(std::vector<double> plus, std::vector<double> minus);
    int r() const { return static_cast<int>(plus_times.size()); }
    int s() const { return static_cast<int>(minus_times.size()); }
};

struct CorrelatorOptions {
    double step{1e-3};       // base finite-difference step
    double threshold{1e-5};  // allowed route disagreement
};

struct CorrelatorResult {
    cplx value;     // operator-chain route
    cplx fd_value;  // Richardson-refined finite differences of Z
    double residual{0.0};
    double step{0.0};
};

// -------------------------------- operations ---------------------------------

// Z[J+, J-] = Tr(C+† rho0 C-) with C± the time-ordered (earliest leftmost)
// products of exp(-i J±(t) a(t)) and a(t) the Heisenberg operator. Z[0,0] = 1
// and Z[J,J] = 1 identically; conj(Z[J+,J-]) = Z[J-,J+] for Hermitian a.
cplx ctp_generating_functional(const MatrixXcd& op, const SmearingVector& j_plus,
                               const SmearingVector& j_minus, const SystemSpec& sys);

// G^{(r,s)} = Tr([latest-leftmost product of a(t+)] rho0 [earliest-leftmost
// product of a(t-)]). Cross-checked against central finite differences of the
// generating functional; the finite-difference pass runs in extended precision
// so that mixed fourth derivatives stay below the threshold.
CorrelatorResult correlator(const MatrixXcd& op, const CorrelatorRequest& req,
                            const SystemSpec& sys, const CorrelatorOptions& opt = {});

// Phase-space generating functional: both branches are chains of daggered
// displacement operators at the path labels, Heisenberg evolved. Equal paths
// give exactly 1. Points must stay inside the truncation-valid region.
cplx phase_space_ctp(const phase::PhasePath& z_plus, const phase::PhasePath& z_minus,
                     const SystemSpec& sys, const phase::FockSpec& spec);

}  // namespace qh::ctp
