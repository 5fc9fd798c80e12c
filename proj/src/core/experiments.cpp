// experiments.cpp — experiment runners: config subtree validation, library
// calls, and deterministic rendering of table and summary outputs

#include "experiments.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "ctp.hpp"
#include "geomphase.hpp"
#include "histories.hpp"
#include "phasespace.hpp"
#include "stochlimit.hpp"
#include "wigner.hpp"

namespace qh::experiments {

namespace {

using config::CapError;
using config::ConfigError;
using config::ExperimentConfig;
using config::Json;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

// ------------------------------- formatting ----------------------------------

std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string fmt_int(long long n) {
    return std::to_string(n);
}

std::string hash_string(std::uint64_t h) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string join_times(const std::vector<double>& ts) {
    std::string out;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (i > 0)
            out += ';';
        out += fmt17(ts[i]);
    }
    return out;
}

struct TableBuilder {
    std::ostringstream text;

    void row(std::initializer_list<std::string> cells) {
        bool first = true;
        for (const std::string& c : cells) {
            if (!first)
                text << ',';
            text << c;
            first = false;
        }
        text << '\n';
    }

    std::string str() const { return text.str(); }
};

std::string metadata_header(const ExperimentConfig& cfg, const std::string& truncation) {
    std::ostringstream out;
    out << "# " << kToolName << ' ' << kToolVersion << '\n';
    out << "# kind: " << config::kind_name(cfg.kind) << '\n';
    out << "# label: " << cfg.label << '\n';
    out << "# config_hash: " << hash_string(cfg.config_hash) << '\n';
    out << "# tolerance: " << fmt17(cfg.tolerance) << '\n';
    out << "# truncation: " << truncation << '\n';
    if (cfg.seed)
        out << "# seed: " << *cfg.seed << " (mt19937_64)" << '\n';
    out << "# workers: " << cfg.workers << '\n';
    return out.str();
}

std::string render_summary(const ExperimentConfig& cfg, const std::string& truncation,
                           Json results) {
    Json meta;
    meta["tool"] = kToolName;
    meta["version"] = kToolVersion;
    meta["kind"] = config::kind_name(cfg.kind);
    meta["label"] = cfg.label;
    meta["config_hash"] = hash_string(cfg.config_hash);
    meta["tolerance"] = cfg.tolerance;
    meta["truncation"] = truncation;
    if (cfg.seed) {
        meta["seed"] = *cfg.seed;
        meta["generator"] = "mt19937_64";
    }
    meta["workers"] = cfg.workers;

    Json root;
    root["meta"] = std::move(meta);
    root["results"] = std::move(results);
    return root.dump(2) + "\n";
}

struct KindOutput {
    std::string truncation;
    std::string table;  // column header plus data rows
    Json results;
};

// ----------------------------- shared subparsers ------------------------------

void require_seed(const ExperimentConfig& cfg) {
    if (!cfg.seed)
        throw ConfigError(std::string("config: 'seed' is required for kind '") +
                          config::kind_name(cfg.kind) + "'");
}

histories::SystemSpec parse_matrix_system(const Json& sys, double tol,
                                          const std::string& who) {
    const MatrixXcd h = config::parse_complex_matrix(
        config::require_field(sys, "hamiltonian", who), who + ".hamiltonian");
    const MatrixXcd rho = config::parse_complex_matrix(
        config::require_field(sys, "initial_state", who), who + ".initial_state");
    if (h.rows() != h.cols() || rho.rows() != rho.cols() || h.rows() != rho.rows())
        throw ConfigError("config: " + who +
                          " hamiltonian and initial_state must be square and equal-sized");
    if (h.rows() > config::kMaxDim)
        throw CapError("config: " + who + " dimension exceeds the cap of " +
                       std::to_string(config::kMaxDim));
    histories::SystemSpec spec(h, rho, tol);
    if (sys.contains("final_weight")) {
        const MatrixXcd w =
            config::parse_complex_matrix(sys.at("final_weight"), who + ".final_weight");
        if (w.rows() != h.rows() || w.cols() != h.cols())
            throw ConfigError("config: " + who + ".final_weight has the wrong shape");
        if (!hilbert::is_hermitian(w, tol))
            throw ConfigError("config: " + who + ".final_weight must be Hermitian");
        spec.final_weight = w;
    }
    return spec;
}

phase::FockSpec parse_fock_system(const Json& sys, const std::string& who) {
    const int ncut = config::get_int(sys, "ncut", who);
    const double omega = config::get_real_or(sys, "omega", who, 1.0);
    if (ncut > config::kMaxNcut)
        throw CapError("config: " + who + ".ncut exceeds the cap of " +
                       std::to_string(config::kMaxNcut));
    return phase::FockSpec(ncut, omega);
}

MatrixXcd parse_projector(const Json& node, Eigen::Index dim, const std::string& where) {
    if (node.is_object() && node.contains("vector")) {
        VectorXcd v = config::parse_complex_vector(node.at("vector"), where + ".vector");
        if (v.size() != dim)
            throw ConfigError("config: '" + where + "' vector length does not match dim");
        const double n = v.norm();
        if (n < 1e-12)
            throw ConfigError("config: '" + where + "' vector must be nonzero");
        v /= n;
        return v * v.adjoint();
    }
    if (node.is_object() && node.contains("matrix")) {
        const MatrixXcd p = config::parse_complex_matrix(node.at("matrix"), where + ".matrix");
        if (p.rows() != dim || p.cols() != dim)
            throw ConfigError("config: '" + where + "' matrix shape does not match dim");
        return p;
    }
    throw ConfigError("config: '" + where + "' must carry either 'vector' or 'matrix'");
}

std::vector<phase::PhasePoint> parse_phase_points(const Json& node, const std::string& where) {
    if (!node.is_array())
        throw ConfigError("config: '" + where + "' must be an array of [chi, xi] pairs");
    std::vector<phase::PhasePoint> pts;
    pts.reserve(node.size());
    for (std::size_t i = 0; i < node.size(); ++i) {
        const std::vector<double> pair =
            config::parse_real_vector(node[i], where + "[" + std::to_string(i) + "]");
        if (pair.size() != 2)
            throw ConfigError("config: '" + where + "[" + std::to_string(i) +
                              "]' must be a [chi, xi] pair");
        pts.push_back({pair[0], pair[1]});
    }
    return pts;
}

void check_ascending(const std::vector<int>& ns, const std::string& where) {
    for (std::size_t i = 1; i < ns.size(); ++i)
        if (ns[i] <= ns[i - 1])
            throw ConfigError("config: '" + where + "' must be strictly increasing");
}

// ------------------------------- consistency ----------------------------------

KindOutput run_consistency(const ExperimentConfig& cfg) {
    const histories::SystemSpec sys = parse_matrix_system(cfg.system, cfg.tolerance, "system");
    const std::vector<double> times =
        config::parse_real_vector(config::require_field(cfg.params, "times", "params"),
                                  "params.times");
    const histories::TimeGrid grid(times);

    const Json& hist_node = config::require_field(cfg.params, "histories", "params");
    if (!hist_node.is_array() || hist_node.empty())
        throw ConfigError("config: 'params.histories' must be a nonempty array");
    if (static_cast<int>(hist_node.size()) > config::kMaxHistories)
        throw CapError("config: history count exceeds the cap of " +
                       std::to_string(config::kMaxHistories));

    std::vector<histories::HistoryProposition> props;
    for (std::size_t k = 0; k < hist_node.size(); ++k) {
        const Json& slots = hist_node[k];
        const std::string where = "params.histories[" + std::to_string(k) + "]";
        if (!slots.is_array() || static_cast<int>(slots.size()) != grid.size())
            throw ConfigError("config: '" + where + "' needs one projector per time");
        std::vector<MatrixXcd> ps;
        for (std::size_t t = 0; t < slots.size(); ++t)
            ps.push_back(parse_projector(slots[t], sys.dim,
                                         where + "[" + std::to_string(t) + "]"));
        props.emplace_back(grid, std::move(ps), cfg.tolerance);
    }

    const double eps = config::get_real_or(cfg.params, "eps", "params", cfg.tolerance);
    const int m = static_cast<int>(props.size());
    MatrixXcd d(m, m);
    double max_offdiag = 0.0;
    double diag_sum = 0.0;
    TableBuilder table;
    table.row({"i", "j", "re", "im"});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            d(i, j) = histories::decoherence_functional(props[i], props[j], sys);
            if (i != j)
                max_offdiag = std::max(max_offdiag, std::abs(d(i, j)));
            else
                diag_sum += d(i, i).real();
            table.row({fmt_int(i), fmt_int(j), fmt17(d(i, j).real()), fmt17(d(i, j).imag())});
        }

    Json results;
    results["eps"] = eps;
    results["consistent"] = max_offdiag <= eps;
    results["max_offdiag"] = max_offdiag;
    results["diag_sum"] = diag_sum;
    Json probs = Json::array();
    for (const auto& h : props)
        probs.push_back(histories::history_probability(h, sys).value);
    results["probabilities"] = std::move(probs);

    if (cfg.params.contains("additivity_pair")) {
        const std::vector<int> pair =
            config::parse_int_vector(cfg.params.at("additivity_pair"), "params.additivity_pair");
        if (pair.size() != 2 || pair[0] < 0 || pair[1] < 0 || pair[0] >= m || pair[1] >= m ||
            pair[0] == pair[1])
            throw ConfigError("config: 'params.additivity_pair' must name two distinct histories");
        const double defect =
            histories::additivity_defect(props[pair[0]], props[pair[1]], sys);
        const double two_re_d = 2.0 * std::abs(d(pair[0], pair[1]).real());
        Json add;
        add["pair"] = pair;
        add["defect"] = defect;
        add["two_re_d"] = two_re_d;
        add["gap"] = std::abs(defect - two_re_d);
        results["additivity"] = std::move(add);
    }

    KindOutput out;
    out.truncation = "dim=" + fmt_int(sys.dim) + ", times=" + fmt_int(grid.size());
    out.table = table.str();
    out.results = std::move(results);
    return out;
}

// ---------------------------------- berry -------------------------------------

VectorXcd bloch_state(double theta, double phi) {
    VectorXcd v(2);
    v << std::cos(theta / 2.0),
        std::exp(cplx(0.0, phi)) * std::sin(theta / 2.0);
    return v;
}

geom::StatePath latitude_path(double theta, int n, const std::vector<cplx>& phases) {
    std::vector<double> times;
    std::vector<VectorXcd> states;
    for (int k = 0; k < n; ++k) {
        times.push_back(static_cast<double>(k) / n);
        VectorXcd v = bloch_state(theta, 2.0 * std::numbers::pi * k / n);
        if (!phases.empty())
            v *= phases[k];
        states.push_back(std::move(v));
    }
    return geom::StatePath(histories::TimeGrid(times), std::move(states));
}

KindOutput run_berry(const ExperimentConfig& cfg) {
    require_seed(cfg);
    const double theta = config::get_real(cfg.params, "theta", "params");
    if (!(theta > 0.0) || !(theta < std::numbers::pi))
        throw ConfigError("config: 'params.theta' must lie strictly inside (0, pi)");
    const std::vector<int> sweep = config::parse_int_vector(
        config::require_field(cfg.params, "n_sweep", "params"), "params.n_sweep");
    if (sweep.size() < 3 || static_cast<int>(sweep.size()) > config::kMaxSweepLength)
        throw ConfigError("config: 'params.n_sweep' needs 3 to 64 entries");
    check_ascending(sweep, "params.n_sweep");
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        if (sweep[i] < 4)
            throw ConfigError("config: 'params.n_sweep' entries must be at least 4");
        if (sweep[i] > 100000)
            throw CapError("config: 'params.n_sweep' entry exceeds the cap of 100000");
        if (i > 0 && sweep[i] != 2 * sweep[i - 1])
            throw ConfigError(
                "config: 'params.n_sweep' must double at each step for the extrapolation");
    }

    TableBuilder table;
    table.row({"n", "phase"});
    std::vector<double> phases;
    for (int n : sweep) {
        const double phi = geom::berry_phase_open_path(latitude_path(theta, n, {}));
        phases.push_back(phi);
        table.row({fmt_int(n), fmt17(phi)});
    }

    // refinement order and extrapolated limit from the last three sweep points
    const double f1 = phases[phases.size() - 3];
    const double f2 = phases[phases.size() - 2];
    const double f3 = phases[phases.size() - 1];
    double order = 0.0;
    double extrapolated = f3;
    if (std::abs(f3 - f2) > 1e-14 && std::abs(f2 - f1) > 1e-14) {
        order = std::log2(std::abs(f2 - f1) / std::abs(f3 - f2));
        if (std::isfinite(order) && order > 0.0)
            extrapolated = f3 + (f3 - f2) / (std::pow(2.0, order) - 1.0);
        else
            order = 0.0;
    }

    // exact gauge invariance: random per-sample rephasing leaves the holonomy
    std::mt19937_64 rng(*cfg.seed);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::vector<cplx> rephase;
    const int n_max = sweep.back();
    rephase.reserve(n_max);
    for (int k = 0; k < n_max; ++k)
        rephase.push_back(std::exp(cplx(0.0, angle(rng))));
    const double regauged =
        geom::berry_phase_open_path(latitude_path(theta, n_max, rephase));

    Json results;
    results["phase_final"] = phases.back();
    results["extrapolated_phase"] = extrapolated;
    results["extrapolation_gap"] = std::abs(phases.back() - extrapolated);
    results["estimated_order"] = order;
    results["gauge_residual"] = std::abs(regauged - phases.back());
    results["continuum_phase"] = -std::numbers::pi * (1.0 - std::cos(theta));

    KindOutput out;
    out.truncation = "dim=2, sweep=" + fmt_int(static_cast<long long>(sweep.size()));
    out.table = table.str();
    out.results = std::move(results);
    return out;
}

// ------------------------------ coherent action -------------------------------

phase::PhasePath circle_label_path(double radius, double phase0, double t0, double t1,
                                   int n, const phase::FockSpec& spec) {
    std::vector<double> times;
    std::vector<phase::PhasePoint> pts;
    for (int k = 0; k <= n; ++k) {
        const double t = t0 + (t1 - t0) * k / n;
        times.push_back(t);
        const cplx z = radius * std::exp(cplx(0.0, phase0 - spec.omega * t));
        pts.push_back({std::sqrt(2.0 / spec.omega) * z.real(),
                       std::sqrt(2.0 * spec.omega) * z.imag()});
    }
    return phase::PhasePath(histories::TimeGrid(times), pts);
}

KindOutput run_coherent_action(const ExperimentConfig& cfg) {
    const phase::FockSpec spec = parse_fock_system(cfg.system, "system");
    const double t0 = config::get_real(cfg.params, "t0", "params");
    const double t1 = config::get_real(cfg.params, "t1", "params");
    if (!(t1 > t0))
        throw ConfigError("config: 'params.t1' must exceed 'params.t0'");

    struct Circle {
        double radius, phase;
    };
    auto parse_circle = [&](const char* key) {
        const Json& node = config::require_field(cfg.params, key, "params");
        const Circle c{config::get_real(node, "radius", std::string("params.") + key),
                       config::get_real_or(node, "phase", std::string("params.") + key, 0.0)};
        if (c.radius < 0.0 || c.radius * c.radius > 0.25 * spec.ncut)
            throw ConfigError(std::string("config: 'params.") + key +
                              ".radius' leaves the valid label region");
        return c;
    };
    const Circle ca = parse_circle("path_a");
    const Circle cb = parse_circle("path_b");

    const std::vector<int> sweep = config::parse_int_vector(
        config::require_field(cfg.params, "n_sweep", "params"), "params.n_sweep");
    if (sweep.empty() || static_cast<int>(sweep.size()) > config::kMaxSweepLength)
        throw ConfigError("config: 'params.n_sweep' needs 1 to 64 entries");
    check_ascending(sweep, "params.n_sweep");
    for (int n : sweep) {
        if (n < 2)
            throw ConfigError("config: 'params.n_sweep' entries must be at least 2");
        if (n > 512)
            throw CapError("config: 'params.n_sweep' entry exceeds the cap of 512");
    }

    const MatrixXcd h = phase::harmonic_hamiltonian(spec);
    TableBuilder table;
    table.row({"n", "op_re", "op_im", "action_re", "action_im", "gap"});
    std::vector<double> gaps;
    double pair_magnitude = 0.0;
    for (int n : sweep) {
        const phase::PhasePath a = circle_label_path(ca.radius, ca.phase, t0, t1, n, spec);
        const phase::PhasePath b = circle_label_path(cb.radius, cb.phase, t0, t1, n, spec);
        const cplx dop = phase::coherent_history_decoherence(a, b, h, spec);
        const cplx dac = phase::action_side_decoherence(a, b, h, spec);
        const double gap = std::abs(dop - dac);
        gaps.push_back(gap);
        pair_magnitude = std::abs(dop);
        table.row({fmt_int(n), fmt17(dop.real()), fmt17(dop.imag()), fmt17(dac.real()),
                   fmt17(dac.imag()), fmt17(gap)});
    }

    bool monotone = true;
    for (std::size_t i = 1; i < gaps.size(); ++i)
        monotone = monotone && gaps[i] < gaps[i - 1];

    Json results;
    results["gaps"] = gaps;
    results["monotone_decreasing"] = monotone;
    results["final_gap"] = gaps.back();
    results["pair_magnitude"] = pair_magnitude;

    KindOutput out;
    out.truncation = "ncut=" + fmt_int(spec.ncut);
    out.table = table.str();
    out.results = std::move(results);
    return out;
}

// ----------------------------- wigner identities ------------------------------

KindOutput run_wigner_identities(const ExperimentConfig& cfg) {
    require_seed(cfg);
    const phase::FockSpec spec = parse_fock_system(cfg.system, "system");
    const Json& grid_node = config::require_field(cfg.params, "grid", "params");
    const int nq = config::get_int(grid_node, "nq", "params.grid");
    const int np = config::get_int(grid_node, "np", "params.grid");
    const double radius = config::get_real(grid_node, "radius", "params.grid");
    if (static_cast<long long>(nq) * np > config::kMaxGridNodes)
        throw CapError("config: grid node count exceeds the cap of " +
                       std::to_string(config::kMaxGridNodes));
    const int n_ops = config::get_int(cfg.params, "n_ops", "params");
    const int op_levels = config::get_int(cfg.params, "op_levels", "params");
    if (n_ops < 2 || n_ops > 64)
        throw ConfigError("config: 'params.n_ops' must lie in [2, 64]");
    if (op_levels < 1 || op_levels > spec.ncut)
        throw ConfigError("config: 'params.op_levels' must lie in [1, ncut]");

    const wigner::PhaseSpaceGrid grid = wigner::make_grid(nq, np, radius);
    const wigner::DeltaTable delta = wigner::make_delta_table(grid, spec);

    std::mt19937_64 rng(*cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto random_low_block = [&]() {
        MatrixXcd block(op_levels, op_levels);
        for (int i = 0; i < op_levels; ++i)
            for (int j = 0; j < op_levels; ++j)
                block(i, j) = cplx(gauss(rng), gauss(rng));
        const MatrixXcd herm = 0.5 * (block + block.adjoint());
        MatrixXcd op = MatrixXcd::Zero(spec.ncut, spec.ncut);
        op.topLeftCorner(op_levels, op_levels) = herm;
        return op;
    };

    std::vector<MatrixXcd> ops;
    std::vector<wigner::WignerField> fields;
    for (int k = 0; k < n_ops; ++k) {
        ops.push_back(random_low_block());
        fields.push_back(wigner::wigner_transform(ops.back(), delta));
    }

    TableBuilder table;
    table.row({"check", "i", "j", "exact_re", "approx_re", "rel_err"});
    double worst_trace = 0.0, worst_pair = 0.0;
    for (int k = 0; k < n_ops; ++k) {
        const double exact = ops[k].trace().real();
        const double approx = wigner::field_integral(fields[k]).real();
        const double err = std::abs(approx - exact) / std::max(1.0, std::abs(exact));
        worst_trace = std::max(worst_trace, err);
        table.row({"trace", fmt_int(k), fmt_int(k), fmt17(exact), fmt17(approx), fmt17(err)});
    }
    for (int k = 0; k + 1 < n_ops; ++k) {
        const double exact = (ops[k] * ops[k + 1]).trace().real();
        const double approx = wigner::field_pair_integral(fields[k], fields[k + 1]).real();
        const double err = std::abs(approx - exact) / std::max(1.0, std::abs(exact));
        worst_pair = std::max(worst_pair, err);
        table.row(
            {"pair", fmt_int(k), fmt_int(k + 1), fmt17(exact), fmt17(approx), fmt17(err)});
    }

    Json results;
    results["worst_trace_err"] = worst_trace;
    results["worst_pair_err"] = worst_pair;
    results["pass"] = worst_trace <= 0.01 && worst_pair <= 0.01;
    results["out_of_region_nodes"] = delta.out_of_region;

    KindOutput out;
    out.truncation =
        "ncut=" + fmt_int(spec.ncut) + ", grid=" + fmt_int(nq) + "x" + fmt_int(np);
    out.table = table.str();
    out.results = std::move(results);
    return out;
}

// --------------------------- multi-time additivity ----------------------------

KindOutput run_multi_time(const ExperimentConfig& cfg) {
    const phase::FockSpec spec = parse_fock_system(cfg.system, "system");
    const std::string ham = config::get_string(cfg.system, "hamiltonian", "system");
    if (ham != "harmonic")
        throw ConfigError("config: 'system.hamiltonian' must be 'harmonic'");

    const Json& initial = config::require_field(cfg.system, "initial", "system");
    VectorXcd psi0;
    if (initial.is_object() && initial.contains("coherent")) {
        const std::vector<double> label =
            config::parse_real_vector(initial.at("coherent"), "system.initial.coherent");
        if (label.size() != 2)
            throw ConfigError("config: 'system.initial.coherent' must be a [chi, xi] pair");
        const phase::PhasePoint pt{label[0], label[1]};
        if (!phase::in_valid_region(pt, spec))
            throw ConfigError("config: 'system.initial.coherent' leaves the valid region");
        psi0 = phase::coherent_state(pt, spec);
    } else if (initial.is_object() && initial.contains("vacuum")) {
        psi0 = phase::vacuum(spec);
    } else {
        throw ConfigError("config: 'system.initial' must carry 'coherent' or 'vacuum'");
    }
    const histories::SystemSpec sys(phase::harmonic_hamiltonian(spec),
                                    MatrixXcd(psi0 * psi0.adjoint()), cfg.tolerance);

    const std::vector<double> times_a = config::parse_real_vector(
        config::require_field(cfg.params, "times_a", "params"), "params.times_a");
    const std::vector<phase::PhasePoint> tail_a = parse_phase_points(
        config::require_field(cfg.params, "tail_a", "params"), "params.tail_a");
    std::vector<double> times_b;
    std::vector<phase::PhasePoint> points_b;
    if (cfg.params.contains("times_b"))
        times_b = config::parse_real_vector(cfg.params.at("times_b"), "params.times_b");
    if (cfg.params.contains("points_b"))
        points_b = parse_phase_points(cfg.params.at("points_b"), "params.points_b");

    const double radius = config::get_real(cfg.params, "radius", "params");
    const Json& grids = config::require_field(cfg.params, "grids", "params");
    if (!grids.is_array() || grids.size() < 2 || grids.size() > 8)
        throw ConfigError("config: 'params.grids' needs 2 to 8 entries");

    TableBuilder table;
    table.row({"nq", "np", "residual"});
    std::vector<double> residuals;
    for (std::size_t g = 0; g < grids.size(); ++g) {
        const std::string where = "params.grids[" + std::to_string(g) + "]";
        const int nq = config::get_int(grids[g], "nq", where);
        const int np = config::get_int(grids[g], "np", where);
        if (static_cast<long long>(nq) * np > config::kMaxGridNodes)
            throw CapError("config: grid node count exceeds the cap of " +
                           std::to_string(config::kMaxGridNodes));
        const wigner::PhaseSpaceGrid grid = wigner::make_grid(nq, np, radius);
        const double res = wigner::marginalization_residual(times_a, tail_a, times_b,
                                                            points_b, sys, spec, grid);
        residuals.push_back(res);
        table.row({fmt_int(nq), fmt_int(np), fmt17(res)});
    }

    const double bound = config::get_real_or(cfg.params, "residual_bound", "params", 0.02);
    const double ratio = residuals[1] / residuals[0];
    Json results;
    results["residuals"] = residuals;
    results["refinement_ratio"] = ratio;
    results["ratio_within_band"] = ratio >= 0.35 && ratio <= 0.65;
    results["max_residual"] = *std::max_element(residuals.begin(), residuals.end());
    results["below_bound"] = *std::max_element(residuals.begin(), residuals.end()) < bound;

    KindOutput out;
    out.truncation = "ncut=" + fmt_int(spec.ncut);
    out.table = table.str();
    out.results = std::move(results);
    return out;
}

// ------------------------------ ctp correlators -------------------------------

KindOutput run_ctp(const ExperimentConfig& cfg) {
    const histories::SystemSpec sys = parse_matrix_system(cfg.system, cfg.tolerance, "system");
    const MatrixXcd op = config::parse_complex_matrix(
        config::require_field(cfg.params, "observable", "params"), "params.observable");
    if (op.rows() != sys.dim || op.cols() != sys.dim)
        throw ConfigError("config: 'params.observable' shape does not match the system");

    const Json& reqs = config::require_field(cfg.params, "requests", "params");
    if (!reqs.is_array() || reqs.empty())
        throw ConfigError("config: 'params.requests' must be a nonempty array");
    if (static_cast<int>(reqs.size()) > config::kMaxRequests)
        throw CapError("config: request count exceeds the cap of " +
                       std::to_string(config::kMaxRequests));

    ctp::CorrelatorOptions opt;
    opt.step = config::get_real_or(cfg.params, "fd_step", "params", 1e-3);
    opt.threshold = config::get_real_or(cfg.params, "threshold", "params", 1e-5);

    TableBuilder table;
    table.row({"r", "s", "plus_times", "minus_times", "value_re", "value_im", "fd_re",
               "fd_im", "residual", "step"});
    double max_residual = 0.0;
    for (std::size_t k = 0; k < reqs.size(); ++k) {
        const std::string where = "params.requests[" + std::to_string(k) + "]";
        const std::vector<double> plus = config::parse_real_vector(
            config::require_field(reqs[k], "plus", where), where + ".plus");
        const std::vector<double> minus = config::parse_real_vector(
            config::require_field(reqs[k], "minus", where), where + ".minus");
        const ctp::CorrelatorRequest request(plus, minus);
        const ctp::CorrelatorResult res = ctp::correlator(op, request, sys, opt);
        max_residual = std::max(max_residual, res.residual);
        table.row({fmt_int(request.r()), fmt_int(request.s()), join_times(plus),
                   join_times(minus), fmt17(res.value.real()), fmt17(res.value.imag()),
                   fmt17(res.fd_value.real()), fmt17(res.fd_value.imag()),
                   fmt17(res.residual), fmt17(res.step)});
    }

    Json results;
    results["max_residual"] = max_residual;
    results["threshold"] = opt.threshold;
    results["pass"] = max_residual <= opt.threshold;

    KindOutput out;
    out.truncation = "dim=" + fmt_int(sys.dim);
    out.table = table.str();
    out.results = std::move(results);
    return out;
}

// ------------------------------ stochastic limit ------------------------------

KindOutput run_stochastic(const ExperimentConfig& cfg) {
    const histories::SystemSpec sys = parse_matrix_system(cfg.system, cfg.tolerance, "system");
    const MatrixXcd observable = config::parse_complex_matrix(
        config::require_field(cfg.params, "observable", "params"), "params.observable");
    if (observable.rows() != sys.dim || observable.cols() != sys.dim)
        throw ConfigError("config: 'params.observable' shape does not match the system");

    const std::vector<double> times = config::parse_real_vector(
        config::require_field(cfg.params, "times", "params"), "params.times");
    const histories::TimeGrid grid(times);

    const Json& cells_node = config::require_field(cfg.params, "cells", "params");
    if (!cells_node.is_array() || cells_node.empty())
        throw ConfigError("config: 'params.cells' must be a nonempty array");
    if (static_cast<int>(cells_node.size()) > config::kMaxCells)
        throw CapError("config: cell count exceeds the cap of " +
                       std::to_string(config::kMaxCells));
    std::vector<std::vector<double>> cells;
    for (std::size_t i = 0; i < cells_node.size(); ++i)
        cells.push_back(config::parse_real_vector(cells_node[i],
                                                  "params.cells[" + std::to_string(i) + "]"));

    const std::vector<double> v_sweep = config::parse_real_vector(
        config::require_field(cfg.params, "v_sweep", "params"), "params.v_sweep");
    if (v_sweep.empty() || static_cast<int>(v_sweep.size()) > config::kMaxSweepLength)
        throw ConfigError("config: 'params.v_sweep' needs 1 to 64 entries");
    const int coarse_factor = config::get_int(cfg.params, "coarse_factor", "params");

    TableBuilder table;
    table.row({"V", "ratio", "residual", "normalization"});
    std::vector<double> ratios, residuals, defects;
    Json approximate = Json::array();
    for (double v : v_sweep) {
        const stoch::SmearedHistorySet set(grid, observable, v, cells);
        const stoch::ExtractedProbabilities p = stoch::extracted_probabilities(set, sys);
        const stoch::KolmogorovReport rep = stoch::kolmogorov_residual(set, sys, coarse_factor);
        ratios.push_back(p.onset_ratio);
        residuals.push_back(rep.residual);
        defects.push_back(rep.overlap_defect);
        approximate.push_back(p.approximate);
        table.row({fmt17(v), fmt17(p.onset_ratio), fmt17(rep.residual),
                   fmt17(p.normalization)});
    }

    auto nonincreasing = [](const std::vector<double>& xs) {
        for (std::size_t i = 1; i < xs.size(); ++i)
            if (xs[i] > xs[i - 1])
                return false;
        return true;
    };
    bool bounded = true;
    for (std::size_t i = 0; i < residuals.size(); ++i)
        bounded = bounded && residuals[i] <= defects[i] + 1e-12;

    Json results;
    results["ratio_monotone_nonincreasing"] = nonincreasing(ratios);
    results["residual_monotone_nonincreasing"] = nonincreasing(residuals);
    results["residual_within_overlap_defect"] = bounded;
    results["overlap_defects"] = defects;
    results["approximate"] = std::move(approximate);

    KindOutput out;
    out.truncation = "dim=" + fmt_int(sys.dim) + ", times=" + fmt_int(grid.size());
    out.table = table.str();
    out.results = std::move(results);
    return out;
}

// -------------------------------- dispatcher ----------------------------------

KindOutput dispatch(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
        case config::Kind::consistency:
            return run_consistency(cfg);
        case config::Kind::berry:
            return run_berry(cfg);
        case config::Kind::coherent_action:
            return run_coherent_action(cfg);
        case config::Kind::wigner_identities:
            return run_wigner_identities(cfg);
        case config::Kind::multi_time_additivity:
            return run_multi_time(cfg);
        case config::Kind::ctp_correlators:
            return run_ctp(cfg);
        case config::Kind::stochastic_limit:
            return run_stochastic(cfg);
    }
    throw std::logic_error("run_experiment: unreachable kind");
}

}  // namespace

RunArtifacts run_experiment(const ExperimentConfig& cfg) {
    // library-level parallelism knob; orchestration itself stays single-threaded
    const int previous_threads = Eigen::nbThreads();
    Eigen::setNbThreads(cfg.workers);
    KindOutput out;
    try {
        out = dispatch(cfg);
    } catch (...) {
        Eigen::setNbThreads(previous_threads);
        throw;
    }
    Eigen::setNbThreads(previous_threads);

    RunArtifacts art;
    art.table_path = cfg.output.table;
    art.summary_path = cfg.output.summary;
    art.table_text = metadata_header(cfg, out.truncation) + out.table;
    art.summary_text = render_summary(cfg, out.truncation, std::move(out.results));
    return art;
}

namespace {

void write_file(const std::string& path, const std::string& bytes) {
    const std::filesystem::path p(path);
    if (p.has_parent_path())
        std::filesystem::create_directories(p.parent_path());
    std::ofstream outf(p, std::ios::binary | std::ios::trunc);
    if (!outf)
        throw std::runtime_error("run: cannot open output file '" + path + "'");
    outf.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    outf.flush();
    if (!outf)
        throw std::runtime_error("run: failed writing output file '" + path + "'");
}

}  // namespace

RunArtifacts run_experiment_file(const std::string& config_path) {
    const ExperimentConfig cfg = config::load_config_file(config_path);
    RunArtifacts art = run_experiment(cfg);
    write_file(art.table_path, art.table_text);
    try {
        write_file(art.summary_path, art.summary_text);
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(art.table_path, ec);
        throw;
    }
    return art;
}

std::string list_experiments() {
    std::ostringstream out;
    for (const config::KindInfo& info : config::kind_registry()) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-22s %s\n", info.name, info.summary);
        out << line;
    }
    return out.str();
}

std::string version_string() {
    return std::string(kToolName) + " " + kToolVersion;
}

}  // namespace qh::experiments
