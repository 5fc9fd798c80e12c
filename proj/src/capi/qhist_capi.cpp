// qhist_capi.cpp — C shims over the experiment runner: exception-to-status
// mapping, thread-local error text, and the opaque run-result handle

#include "qhist.h"

#include <exception>
#include <stdexcept>
#include <string>

#include "config.hpp"
#include "experiments.hpp"

struct qh_run_result {
    std::string table_path;
    std::string summary_path;
};

namespace {

thread_local std::string g_last_error;

}  // namespace

extern "C" {

const char* qh_version(void) {
    static const std::string version = qh::experiments::version_string();
    return version.c_str();
}

const char* qh_last_error(void) {
    return g_last_error.c_str();
}

const char* qh_list_experiments(void) {
    static const std::string listing = qh::experiments::list_experiments();
    return listing.c_str();
}

int qh_run_experiment(const char* config_path, qh_run_result** out) {
    if (out)
        *out = nullptr;
    if (!config_path) {
        g_last_error = "config: path is null";
        return QH_ERR_VALIDATION;
    }
    try {
        const qh::experiments::RunArtifacts art =
            qh::experiments::run_experiment_file(config_path);
        if (out)
            *out = new qh_run_result{art.table_path, art.summary_path};
        g_last_error.clear();
        return QH_OK;
    } catch (const qh::config::CapError& e) {
        g_last_error = e.what();
        return QH_ERR_CAP;
    } catch (const qh::config::ConfigError& e) {
        g_last_error = e.what();
        return QH_ERR_VALIDATION;
    } catch (const std::invalid_argument& e) {
        g_last_error = e.what();
        return QH_ERR_VALIDATION;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return QH_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return QH_ERR_INTERNAL;
    }
}

const char* qh_run_table_path(const qh_run_result* result) {
    return result ? result->table_path.c_str() : "";
}

const char* qh_run_summary_path(const qh_run_result* result) {
    return result ? result->summary_path.c_str() : "";
}

void qh_run_result_free(qh_run_result* result) {
    delete result;
}

}  // extern "C"
