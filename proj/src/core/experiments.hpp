// experiments.hpp — experiment dispatch: builds library inputs from a parsed
// configuration, runs the computation, and renders the deterministic table
// and summary outputs

#pragma once

#include <string>

#include "config.hpp"

namespace qh::experiments {

inline constexpr const char* kToolName = "qhist";
inline constexpr const char* kToolVersion = "0.1.0";

struct RunArtifacts {
    std::string table_path;    // as given in the config
    std::string summary_path;  // as given in the config
    std::string table_text;    // full rendered bytes, metadata header first
    std::string summary_text;
};

// Pure compute and render; performs no filesystem writes.
RunArtifacts run_experiment(const config::ExperimentConfig& cfg);

// Loads the config, runs it, then writes both outputs (creating parent
// directories). Nothing is written unless the whole run succeeds.
RunArtifacts run_experiment_file(const std::string& config_path);

// One line per registered kind, stable order.
std::string list_experiments();

std::string version_string();

}  // namespace qh::experiments
