// config.hpp — experiment configuration: JSON envelope parsing, the kind
// registry with nearest-match lookup, resource caps, and the content hash
// recorded in every output file

#pragma once

#include <Eigen/Dense>

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qh::config {

using Json = nlohmann::ordered_json;

// ---------------------------------- errors -----------------------------------

// Malformed or out-of-contract configuration content.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structurally valid request that exceeds a resource cap.
struct CapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ----------------------------------- caps ------------------------------------

inline constexpr int kMaxDim = 200;        // dense system dimension
inline constexpr int kMaxNcut = 200;       // Fock levels
inline constexpr int kMaxGridNodes = 40000;
inline constexpr int kMaxCells = 4096;
inline constexpr int kMaxHistories = 64;
inline constexpr int kMaxSweepLength = 64;
inline constexpr int kMaxRequests = 16;
inline constexpr int kMaxWorkers = 64;

// ----------------------------------- kinds -----------------------------------

enum class Kind {
    consistency,
    berry,
    coherent_action,
    wigner_identities,
    multi_time_additivity,
    ctp_correlators,
    stochastic_limit,
};

struct KindInfo {
    Kind kind;
    const char* name;
    const char* summary;
};

// Stable listing order.
const std::vector<KindInfo>& kind_registry();

// Throws ConfigError naming the nearest registered kind.
Kind kind_from_name(const std::string& name);
const char* kind_name(Kind kind);
std::string nearest_kind_name(const std::string& name);

// --------------------------------- envelope ----------------------------------

struct OutputSpec {
    std::string table;
    std::string summary;
};

struct ExperimentConfig {
    Kind kind{Kind::consistency};
    std::string label;
    double tolerance{1e-9};
    int workers{1};
    std::optional<std::uint64_t> seed;
    OutputSpec output;
    Json system;  // kind-specific subtree, may be null
    Json params;  // kind-specific subtree
    std::uint64_t config_hash{0};  // FNV-1a over the raw config bytes
};

std::uint64_t fnv1a64(std::string_view bytes);

// Parses and validates the common envelope; kind-specific subtrees are
// validated by the experiment that consumes them.
ExperimentConfig parse_config(const std::string& raw_text);

// Reads the file and delegates to parse_config.
ExperimentConfig load_config_file(const std::string& path);

// ------------------------------ typed accessors -------------------------------
// All throw ConfigError with the offending location in the message.

const Json& require_field(const Json& node, const std::string& key, const std::string& where);
double get_real(const Json& node, const std::string& key, const std::string& where);
double get_real_or(const Json& node, const std::string& key, const std::string& where,
                   double fallback);
int get_int(const Json& node, const std::string& key, const std::string& where);
int get_int_or(const Json& node, const std::string& key, const std::string& where,
               int fallback);
std::string get_string(const Json& node, const std::string& key, const std::string& where);

std::vector<double> parse_real_vector(const Json& node, const std::string& where);
std::vector<int> parse_int_vector(const Json& node, const std::string& where);

// Row-major matrix of [re, im] entries.
Eigen::MatrixXcd parse_complex_matrix(const Json& node, const std::string& where);
// Column vector of [re, im] entries.
Eigen::VectorXcd parse_complex_vector(const Json& node, const std::string& where);

}  // namespace qh::config
