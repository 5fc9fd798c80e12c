// config.cpp — experiment configuration parsing and validation

#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qh::config {

// ----------------------------------- kinds -----------------------------------

const std::vector<KindInfo>& kind_registry() {
    static const std::vector<KindInfo> registry = {
        {Kind::consistency, "consistency",
         "pairwise decoherence matrix, consistency flag, and additivity defect"},
        {Kind::berry, "berry",
         "discrete holonomy of a Bloch latitude circle with a refinement sweep"},
        {Kind::coherent_action, "coherent-action",
         "operator-side versus action-side coherent pairings along label circles"},
        {Kind::wigner_identities, "wigner-identities",
         "trace and trace-pairing identities of sampled Wigner fields"},
        {Kind::multi_time_additivity, "multi-time-additivity",
         "marginalization residual of multi-time pseudo-densities under grid refinement"},
        {Kind::ctp_correlators, "ctp-correlators",
         "closed-time-path correlators with the finite-difference cross-check"},
        {Kind::stochastic_limit, "stochastic-limit",
         "Gaussian-smearing sweep: onset ratio, Kolmogorov residual, normalization"},
    };
    return registry;
}

const char* kind_name(Kind kind) {
    for (const KindInfo& info : kind_registry())
        if (info.kind == kind)
            return info.name;
    return "unknown";
}

namespace {

int edit_distance(const std::string& a, const std::string& b) {
    const int n = static_cast<int>(a.size()), m = static_cast<int>(b.size());
    std::vector<int> prev(m + 1), cur(m + 1);
    for (int j = 0; j <= m; ++j)
        prev[j] = j;
    for (int i = 1; i <= n; ++i) {
        cur[0] = i;
        for (int j = 1; j <= m; ++j) {
            const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

}  // namespace

std::string nearest_kind_name(const std::string& name) {
    int best = 1 << 30;
    std::string winner;
    for (const KindInfo& info : kind_registry()) {
        const int d = edit_distance(name, info.name);
        if (d < best) {
            best = d;
            winner = info.name;
        }
    }
    return winner;
}

Kind kind_from_name(const std::string& name) {
    for (const KindInfo& info : kind_registry())
        if (name == info.name)
            return info.kind;
    throw ConfigError("config: unknown experiment kind '" + name + "' (nearest match: " +
                      nearest_kind_name(name) + ")");
}

// ----------------------------------- hash ------------------------------------

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 1099511628211ull;
    }
    return h;
}

// ------------------------------ typed accessors -------------------------------

const Json& require_field(const Json& node, const std::string& key, const std::string& where) {
    if (!node.is_object() || !node.contains(key))
        throw ConfigError("config: missing required field '" + where + "." + key + "'");
    return node.at(key);
}

namespace {

double as_real(const Json& j, const std::string& where) {
    if (!j.is_number())
        throw ConfigError("config: '" + where + "' must be a number");
    const double x = j.get<double>();
    if (!std::isfinite(x))
        throw ConfigError("config: '" + where + "' must be finite");
    return x;
}

int as_int(const Json& j, const std::string& where) {
    if (!j.is_number_integer() && !j.is_number_unsigned())
        throw ConfigError("config: '" + where + "' must be an integer");
    return j.get<int>();
}

}  // namespace

double get_real(const Json& node, const std::string& key, const std::string& where) {
    return as_real(require_field(node, key, where), where + "." + key);
}

double get_real_or(const Json& node, const std::string& key, const std::string& where,
                   double fallback) {
    if (!node.is_object() || !node.contains(key))
        return fallback;
    return as_real(node.at(key), where + "." + key);
}

int get_int(const Json& node, const std::string& key, const std::string& where) {
    return as_int(require_field(node, key, where), where + "." + key);
}

int get_int_or(const Json& node, const std::string& key, const std::string& where,
               int fallback) {
    if (!node.is_object() || !node.contains(key))
        return fallback;
    return as_int(node.at(key), where + "." + key);
}

std::string get_string(const Json& node, const std::string& key, const std::string& where) {
    const Json& j = require_field(node, key, where);
    if (!j.is_string())
        throw ConfigError("config: '" + where + "." + key + "' must be a string");
    return j.get<std::string>();
}

std::vector<double> parse_real_vector(const Json& node, const std::string& where) {
    if (!node.is_array())
        throw ConfigError("config: '" + where + "' must be an array of numbers");
    std::vector<double> out;
    out.reserve(node.size());
    for (std::size_t i = 0; i < node.size(); ++i)
        out.push_back(as_real(node[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<int> parse_int_vector(const Json& node, const std::string& where) {
    if (!node.is_array())
        throw ConfigError("config: '" + where + "' must be an array of integers");
    std::vector<int> out;
    out.reserve(node.size());
    for (std::size_t i = 0; i < node.size(); ++i)
        out.push_back(as_int(node[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

Eigen::VectorXcd parse_complex_vector(const Json& node, const std::string& where) {
    if (!node.is_array() || node.empty())
        throw ConfigError("config: '" + where + "' must be a nonempty array of [re, im] pairs");
    Eigen::VectorXcd v(node.size());
    for (std::size_t i = 0; i < node.size(); ++i) {
        const Json& e = node[i];
        const std::string at = where + "[" + std::to_string(i) + "]";
        if (!e.is_array() || e.size() != 2)
            throw ConfigError("config: '" + at + "' must be an [re, im] pair");
        v(static_cast<Eigen::Index>(i)) =
            std::complex<double>(as_real(e[0], at), as_real(e[1], at));
    }
    return v;
}

Eigen::MatrixXcd parse_complex_matrix(const Json& node, const std::string& where) {
    if (!node.is_array() || node.empty())
        throw ConfigError("config: '" + where + "' must be a nonempty array of rows");
    const std::size_t rows = node.size();
    std::size_t cols = 0;
    Eigen::MatrixXcd m;
    for (std::size_t i = 0; i < rows; ++i) {
        const Json& row = node[i];
        const std::string at = where + "[" + std::to_string(i) + "]";
        if (!row.is_array() || row.empty())
            throw ConfigError("config: '" + at + "' must be a nonempty row of [re, im] pairs");
        if (i == 0) {
            cols = row.size();
            m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        } else if (row.size() != cols) {
            throw ConfigError("config: '" + where + "' rows differ in length");
        }
        for (std::size_t j = 0; j < cols; ++j) {
            const Json& e = row[j];
            const std::string cell = at + "[" + std::to_string(j) + "]";
            if (!e.is_array() || e.size() != 2)
                throw ConfigError("config: '" + cell + "' must be an [re, im] pair");
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::complex<double>(as_real(e[0], cell), as_real(e[1], cell));
        }
    }
    return m;
}

// --------------------------------- envelope ----------------------------------

ExperimentConfig parse_config(const std::string& raw_text) {
    Json root;
    try {
        root = Json::parse(raw_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }
    if (!root.is_object())
        throw ConfigError("config: top level must be an object");

    static const std::vector<std::string> known = {
        "kind", "label", "tolerance", "workers", "seed", "output", "system", "params"};
    for (const auto& item : root.items())
        if (std::find(known.begin(), known.end(), item.key()) == known.end())
            throw ConfigError("config: unknown top-level field '" + item.key() + "'");

    ExperimentConfig cfg;
    cfg.kind = kind_from_name(get_string(root, "kind", "config"));
    if (root.contains("label"))
        cfg.label = get_string(root, "label", "config");

    cfg.tolerance = get_real_or(root, "tolerance", "config", 1e-9);
    if (!(cfg.tolerance > 0.0) || cfg.tolerance > 1e-2)
        throw ConfigError("config: 'tolerance' must lie in (0, 1e-2]");

    cfg.workers = get_int_or(root, "workers", "config", 1);
    if (cfg.workers < 1 || cfg.workers > kMaxWorkers)
        throw ConfigError("config: 'workers' must lie in [1, " +
                          std::to_string(kMaxWorkers) + "]");

    if (root.contains("seed")) {
        const Json& s = root.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
            throw ConfigError("config: 'seed' must be a nonnegative integer");
        cfg.seed = s.get<std::uint64_t>();
    }

    const Json& output = require_field(root, "output", "config");
    cfg.output.table = get_string(output, "table", "config.output");
    cfg.output.summary = get_string(output, "summary", "config.output");
    if (cfg.output.table.empty() || cfg.output.summary.empty())
        throw ConfigError("config: output paths must be nonempty");
    if (cfg.output.table == cfg.output.summary)
        throw ConfigError("config: output table and summary paths must differ");

    if (root.contains("system")) {
        cfg.system = root.at("system");
        if (!cfg.system.is_object())
            throw ConfigError("config: 'system' must be an object");
    }
    const Json& params = require_field(root, "params", "config");
    if (!params.is_object())
        throw ConfigError("config: 'params' must be an object");
    cfg.params = params;

    cfg.config_hash = fnv1a64(raw_text);
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace qh::config
