// stochlimit.cpp — smeared effect histories and the classical-limit pipeline

#include "stochlimit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

#include "hilbert.hpp"

namespace qh::stoch {

namespace {

constexpr double kCenterMergeTol = 1e-9;

void require_centers(const TimeGrid& grid, const std::vector<std::vector<double>>& cells) {
    for (const std::vector<double>& cell : cells) {
        if (static_cast<int>(cell.size()) != grid.size())
            throw std::invalid_argument("SmearedHistorySet: one center per grid time required");
        for (double c : cell)
            if (!std::isfinite(c))
                throw std::invalid_argument("SmearedHistorySet: centers must be finite");
    }
    for (std::size_t i = 0; i < cells.size(); ++i)
        for (std::size_t j = i + 1; j < cells.size(); ++j)
            if (cells[i] == cells[j])
                throw std::invalid_argument("SmearedHistorySet: cells must be distinct");
}

}  // namespace

// ---------------------------------- types -----------------------------------

SmearedHistorySet::SmearedHistorySet(TimeGrid g, MatrixXcd a, double width,
                                     std::vector<std::vector<double>> centers)
    : grid(std::move(g)), observable(std::move(a)), v(width), cells(std::move(centers)) {
    if (!(v > 0.0))
        throw std::invalid_argument("SmearedHistorySet: V must be positive");
    if (!hilbert::is_hermitian(observable, 1e-10))
        throw std::invalid_argument("SmearedHistorySet: observable must be Hermitian");
    if (cells.empty())
        throw std::invalid_argument("SmearedHistorySet: need at least one cell");
    require_centers(grid, cells);
}

CoherentCellSet::CoherentCellSet(TimeGrid g, std::vector<std::vector<phase::PhasePoint>> centers)
    : grid(std::move(g)), cells(std::move(centers)) {
    if (cells.empty())
        throw std::invalid_argument("CoherentCellSet: need at least one cell");
    for (const auto& cell : cells)
        if (static_cast<int>(cell.size()) != grid.size())
            throw std::invalid_argument("CoherentCellSet: one point per grid time required");
}

// -------------------------------- operations ---------------------------------

MatrixXcd gaussian_pos_operator(double center, double v, const MatrixXcd& a) {
    if (!(v > 0.0))
        throw std::invalid_argument("gaussian_pos_operator: V must be positive");
    if (!std::isfinite(center))
        throw std::invalid_argument("gaussian_pos_operator: center must be finite");
    if (!hilbert::is_hermitian(a, 1e-10))
        throw std::invalid_argument("gaussian_pos_operator: observable must be Hermitian");
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(a);
    Eigen::VectorXd weights = es.eigenvalues();
    for (Eigen::Index k = 0; k < weights.size(); ++k) {
        const double gap = weights(k) - center;
        weights(k) = std::exp(-gap * gap / (2.0 * std::sqrt(v)));
    }
    return es.eigenvectors() * weights.asDiagonal() * es.eigenvectors().adjoint();
}

MatrixXcd coherent_cell_operator(const phase::PhasePoint& center, double v,
                                 const phase::FockSpec& spec) {
    if (!(v > 0.0))
        throw std::invalid_argument("coherent_cell_operator: V must be positive");
    const MatrixXcd d = phase::displacement(center, spec);
    Eigen::VectorXcd weights(spec.ncut);
    for (int n = 0; n < spec.ncut; ++n)
        weights(n) = std::exp(-static_cast<double>(n) / (2.0 * std::sqrt(v)));
    return d * weights.asDiagonal() * d.adjoint();
}

MatrixXcd effect_chain(const TimeGrid& grid, const std::vector<MatrixXcd>& effects,
                       const SystemSpec& sys) {
    if (static_cast<int>(effects.size()) != grid.size())
        throw std::invalid_argument("effect_chain: one effect per grid time required");
    MatrixXcd chain = MatrixXcd::Identity(sys.dim, sys.dim);
    for (int t = 0; t < grid.size(); ++t) {
        if (effects[t].rows() != sys.dim || effects[t].cols() != sys.dim)
            throw std::invalid_argument("effect_chain: effect shape mismatch");
        const MatrixXcd u = sys.evolver().propagator(grid.times[t]);
        chain = chain * (u.adjoint() * effects[t] * u);
    }
    return chain;
}

histories::DecoherenceMatrix effect_decoherence_matrix(
    const TimeGrid& grid, const std::vector<std::vector<MatrixXcd>>& effect_histories,
    const SystemSpec& sys) {
    const int m = static_cast<int>(effect_histories.size());
    if (m == 0)
        throw std::invalid_argument("effect_decoherence_matrix: empty family");
    std::vector<MatrixXcd> chains;
    chains.reserve(m);
    for (const auto& effects : effect_histories)
        chains.push_back(effect_chain(grid, effects, sys));

    histories::DecoherenceMatrix out;
    out.values.resize(m, m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const cplx d = (chains[i].adjoint() * sys.initial_state * chains[j]).trace();
            out.values(i, j) = d;
            if (i == j)
                out.diag_sum += std::real(d);
            else
                out.max_offdiag = std::max(out.max_offdiag, std::abs(d));
        }
    }
    return out;
}

namespace {

std::vector<std::vector<MatrixXcd>> gaussian_effect_histories(
    const SmearedHistorySet& set, double v) {
    std::vector<std::vector<MatrixXcd>> hist;
    hist.reserve(set.cells.size());
    std::map<double, MatrixXcd> cache;
    for (const std::vector<double>& cell : set.cells) {
        std::vector<MatrixXcd> effects;
        effects.reserve(cell.size());
        for (double center : cell) {
            auto it = cache.find(center);
            if (it == cache.end())
                it = cache.emplace(center, gaussian_pos_operator(center, v, set.observable))
                         .first;
            effects.push_back(it->second);
        }
        hist.push_back(std::move(effects));
    }
    return hist;
}

std::vector<OnsetRow> onset_from_matrices(
    const std::vector<double>& v_sweep,
    const std::function<histories::DecoherenceMatrix(double)>& build) {
    std::vector<OnsetRow> rows;
    rows.reserve(v_sweep.size());
    for (double v : v_sweep) {
        if (!(v > 0.0))
            throw std::invalid_argument("decoherence_onset: V values must be positive");
        const histories::DecoherenceMatrix d = build(v);
        const int m = static_cast<int>(d.values.rows());
        double log_geomean = 0.0;
        for (int i = 0; i < m; ++i) {
            const double diag = std::real(d.values(i, i));
            if (!(diag > 0.0))
                throw std::runtime_error("decoherence_onset: nonpositive diagonal entry");
            log_geomean += std::log(diag);
        }
        const double geomean = std::exp(log_geomean / m);
        rows.push_back({v, d.max_offdiag / geomean, d.max_offdiag, geomean});
    }
    return rows;
}

}  // namespace

cplx smeared_decoherence(const TimeGrid& grid, const std::vector<double>& centers_a,
                         const std::vector<double>& centers_b, double v,
                         const MatrixXcd& a, const SystemSpec& sys) {
    if (static_cast<int>(centers_a.size()) != grid.size() ||
        static_cast<int>(centers_b.size()) != grid.size())
        throw std::invalid_argument("smeared_decoherence: one center per grid time required");
    std::vector<MatrixXcd> ea, eb;
    for (double c : centers_a)
        ea.push_back(gaussian_pos_operator(c, v, a));
    for (double c : centers_b)
        eb.push_back(gaussian_pos_operator(c, v, a));
    const MatrixXcd ca = effect_chain(grid, ea, sys);
    const MatrixXcd cb = effect_chain(grid, eb, sys);
    return (ca.adjoint() * sys.initial_state * cb).trace();
}

histories::DecoherenceMatrix smeared_decoherence_matrix(const SmearedHistorySet& set,
                                                        const SystemSpec& sys) {
    return effect_decoherence_matrix(set.grid, gaussian_effect_histories(set, set.v), sys);
}

std::vector<OnsetRow> decoherence_onset(const SmearedHistorySet& set,
                                        const std::vector<double>& v_sweep,
                                        const SystemSpec& sys) {
    return onset_from_matrices(v_sweep, [&](double v) {
        return effect_decoherence_matrix(set.grid, gaussian_effect_histories(set, v), sys);
    });
}

std::vector<OnsetRow> decoherence_onset(const CoherentCellSet& set,
                                        const std::vector<double>& v_sweep,
                                        const SystemSpec& sys, const phase::FockSpec& spec) {
    return onset_from_matrices(v_sweep, [&](double v) {
        std::vector<std::vector<MatrixXcd>> hist;
        hist.reserve(set.cells.size());
        for (const auto& cell : set.cells) {
            std::vector<MatrixXcd> effects;
            for (const phase::PhasePoint& pt : cell)
                effects.push_back(coherent_cell_operator(pt, v, spec));
            hist.push_back(std::move(effects));
        }
        return effect_decoherence_matrix(set.grid, hist, sys);
    });
}

ExtractedProbabilities extracted_probabilities(const SmearedHistorySet& set,
                                               const SystemSpec& sys,
                                               double onset_threshold) {
    const histories::DecoherenceMatrix d = smeared_decoherence_matrix(set, sys);
    const int m = static_cast<int>(set.cells.size());
    const double scale = std::pow(set.v, set.grid.size());

    ExtractedProbabilities out;
    out.values.reserve(m);
    out.raw.reserve(m);
    double max_raw = 0.0;
    for (int i = 0; i < m; ++i)
        max_raw = std::max(max_raw, std::abs(std::real(d.values(i, i))));
    for (int i = 0; i < m; ++i) {
        const double raw = std::real(d.values(i, i));
        if (raw < -1e-10 * std::max(1.0, max_raw))
            throw std::runtime_error("extracted_probabilities: negative diagonal value");
        out.raw.push_back(raw);
        out.values.push_back(std::max(raw, 0.0) / scale);
        out.normalization += out.values.back();
    }

    double log_geomean = 0.0;
    for (int i = 0; i < m; ++i)
        log_geomean += std::log(std::max(std::real(d.values(i, i)), 1e-300));
    out.onset_ratio = d.max_offdiag / std::exp(log_geomean / m);
    out.approximate = out.onset_ratio > onset_threshold;
    return out;
}

KolmogorovReport kolmogorov_residual(const SmearedHistorySet& set, const SystemSpec& sys,
                                     int coarse_factor) {
    const int n = set.grid.size();
    if (n < 2)
        throw std::invalid_argument("kolmogorov_residual: need at least two grid times");
    if (coarse_factor < 2)
        throw std::invalid_argument("kolmogorov_residual: coarse factor must be at least 2");

    // distinct final-time centers, ascending
    std::vector<double> finals;
    for (const auto& cell : set.cells) {
        const double c = cell.back();
        bool seen = false;
        for (double f : finals)
            seen = seen || std::abs(f - c) <= kCenterMergeTol;
        if (!seen)
            finals.push_back(c);
    }
    std::sort(finals.begin(), finals.end());
    if (static_cast<int>(finals.size()) % coarse_factor != 0)
        throw std::invalid_argument(
            "kolmogorov_residual: final-time centers not divisible into coarse groups");

    // every prefix must fan out over the full final-center list
    std::map<std::vector<double>, std::vector<std::size_t>> by_prefix;
    for (std::size_t i = 0; i < set.cells.size(); ++i) {
        std::vector<double> prefix(set.cells[i].begin(), set.cells[i].end() - 1);
        by_prefix[prefix].push_back(i);
    }
    for (const auto& [prefix, members] : by_prefix)
        if (members.size() != finals.size())
            throw std::invalid_argument(
                "kolmogorov_residual: cells must pair every prefix with every final center");

    const ExtractedProbabilities fine = extracted_probabilities(set, sys);
    const double v_coarse =
        set.v * std::pow(static_cast<double>(coarse_factor), 4.0 / 3.0);
    const double coarse_scale = std::pow(set.v, n - 1) * v_coarse;

    KolmogorovReport report;
    report.coarse_factor = coarse_factor;
    for (const auto& [prefix, members] : by_prefix) {
        std::vector<MatrixXcd> prefix_effects;
        for (double c : prefix)
            prefix_effects.push_back(gaussian_pos_operator(c, set.v, set.observable));
        for (std::size_t g = 0; g + coarse_factor <= finals.size(); g += coarse_factor) {
            double center = 0.0;
            for (int k = 0; k < coarse_factor; ++k)
                center += finals[g + k];
            center /= coarse_factor;

            std::vector<MatrixXcd> effects = prefix_effects;
            effects.push_back(gaussian_pos_operator(center, v_coarse, set.observable));
            const MatrixXcd chain = effect_chain(set.grid, effects, sys);
            const double p_coarse =
                std::real((chain.adjoint() * sys.initial_state * chain).trace()) /
                coarse_scale;

            double p_sum = 0.0;
            for (std::size_t idx : members) {
                const double f = set.cells[idx].back();
                for (int k = 0; k < coarse_factor; ++k)
                    if (std::abs(f - finals[g + k]) <= kCenterMergeTol)
                        p_sum += fine.values[idx];
            }
            report.residual = std::max(report.residual, std::abs(p_sum - p_coarse));
        }
    }

    // final-slot weight mismatch at the observable's eigenvalues, scaled to
    // probability units; bounds the residual since the prefix weight is <= 1
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(set.observable);
    const Eigen::VectorXd lam = es.eigenvalues();
    for (std::size_t g = 0; g + coarse_factor <= finals.size(); g += coarse_factor) {
        double center = 0.0;
        for (int k = 0; k < coarse_factor; ++k)
            center += finals[g + k];
        center /= coarse_factor;
        for (Eigen::Index e = 0; e < lam.size(); ++e) {
            double fine_weight = 0.0;
            for (int k = 0; k < coarse_factor; ++k) {
                const double gap = lam(e) - finals[g + k];
                fine_weight += std::exp(-gap * gap / std::sqrt(set.v)) / set.v;
            }
            const double gap_c = lam(e) - center;
            const double coarse_weight =
                std::exp(-gap_c * gap_c / std::sqrt(v_coarse)) / v_coarse;
            report.overlap_defect =
                std::max(report.overlap_defect, std::abs(fine_weight - coarse_weight) /
                                                    std::pow(set.v, n - 1));
        }
    }
    return report;
}

cplx classical_generating_functional(const SmearedHistorySet& set, const SystemSpec& sys,
                                     const std::vector<double>& source) {
    if (static_cast<int>(source.size()) != set.grid.size())
        throw std::invalid_argument(
            "classical_generating_functional: one source value per grid time required");
    const ExtractedProbabilities p = extracted_probabilities(set, sys);
    cplx z = 0.0;
    for (std::size_t i = 0; i < set.cells.size(); ++i) {
        double phase_arg = 0.0;
        for (int t = 0; t < set.grid.size(); ++t)
            phase_arg += set.cells[i][t] * source[t];
        z += p.values[i] * std::exp(cplx(0.0, phase_arg));
    }
    return z;
}

}  // namespace qh::stoch
