// stochlimit.hpp — Gaussian-smeared effect histories, decoherence onset
// sweeps, extracted probability tables, Kolmogorov residuals, and the
// classical generating functional

#pragma once

#include <Eigen/Dense>

#include <vector>

#include "common.hpp"
#include "histories.hpp"
#include "phasespace.hpp"

namespace qh::stoch {

using Eigen::MatrixXcd;
using histories::SystemSpec;
using histories::TimeGrid;

// ---------------------------------- types -----------------------------------

// A family of smeared histories of one Hermitian observable: each cell is a
// tuple of Gaussian centers, one per grid time, all sharing the width V.
struct SmearedHistorySet {
    TimeGrid grid;
    MatrixXcd observable;
    double v{0.0};
    std::vector<std::vector<double>> cells;

    SmearedHistorySet(TimeGrid g, MatrixXcd a, double width,
                      std::vector<std::vector<double>> centers);
};

// Cells labeled by phase-space points; the cell operator is a Gaussian in the
// displaced number operator, the squared coherent-state distance.
struct CoherentCellSet {
    TimeGrid grid;
    std::vector<std::vector<phase::PhasePoint>> cells;

    CoherentCellSet(TimeGrid g, std::vector<std::vector<phase::PhasePoint>> centers);
};

struct OnsetRow {
    double v{0.0};
    double ratio{0.0};  // max offdiagonal modulus over geometric mean of diagonals
    double max_offdiag{0.0};
    double diag_geomean{0.0};
};

struct ExtractedProbabilities {
    std::vector<double> values;  // raw / V^n, tiny negatives clamped
    std::vector<double> raw;     // diagonal functional values before scaling
    double normalization{0.0};   // sum over the family
    double onset_ratio{0.0};
    bool approximate{false};     // onset ratio above the declared threshold
};

struct KolmogorovReport {
    double residual{0.0};        // max over coarse cells of |sum fine p - coarse p|
    double overlap_defect{0.0};  // rigorous bound from the final-slot weight mismatch
    int coarse_factor{0};
};

// -------------------------------- operations ---------------------------------

// exp(-(a - center)^2 / (2 sqrt(V))) by spectral calculus; positive, <= 1.
MatrixXcd gaussian_pos_operator(double center, double v, const MatrixXcd& a);

// D(center) exp(-n / (2 sqrt(V))) D(center)†.
MatrixXcd coherent_cell_operator(const phase::PhasePoint& center, double v,
                                 const phase::FockSpec& spec);

// Heisenberg chain of arbitrary effect operators, earliest leftmost.
MatrixXcd effect_chain(const TimeGrid& grid, const std::vector<MatrixXcd>& effects,
                       const SystemSpec& sys);

// Pairwise Tr(C_i† rho0 C_j) over a family of effect histories.
histories::DecoherenceMatrix effect_decoherence_matrix(
    const TimeGrid& grid, const std::vector<std::vector<MatrixXcd>>& effect_histories,
    const SystemSpec& sys);

cplx smeared_decoherence(const TimeGrid& grid, const std::vector<double>& centers_a,
                         const std::vector<double>& centers_b, double v,
                         const MatrixXcd& a, const SystemSpec& sys);

histories::DecoherenceMatrix smeared_decoherence_matrix(const SmearedHistorySet& set,
                                                        const SystemSpec& sys);

std::vector<OnsetRow> decoherence_onset(const SmearedHistorySet& set,
                                        const std::vector<double>& v_sweep,
                                        const SystemSpec& sys);
std::vector<OnsetRow> decoherence_onset(const CoherentCellSet& set,
                                        const std::vector<double>& v_sweep,
                                        const SystemSpec& sys, const phase::FockSpec& spec);

ExtractedProbabilities extracted_probabilities(const SmearedHistorySet& set,
                                               const SystemSpec& sys,
                                               double onset_threshold = 0.1);

// Coarsens the final-time partition by merging groups of coarse_factor
// adjacent centers into one wider Gaussian cell (center mean, width scaled by
// coarse_factor^(4/3)) and compares summed fine against coarse probabilities.
KolmogorovReport kolmogorov_residual(const SmearedHistorySet& set, const SystemSpec& sys,
                                     int coarse_factor);

// Z[J] = sum over cells of p e^{i sum_t center_t J_t}; J has one real entry
// per grid time.
cplx classical_generating_functional(const SmearedHistorySet& set, const SystemSpec& sys,
                                     const std::vector<double>& source);

}  // namespace qh::stoch
