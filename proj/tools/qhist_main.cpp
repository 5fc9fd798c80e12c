// qhist_main.cpp — command-line front end; links only against the C
// interface and maps its status codes straight onto process exit codes

#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "qhist.h"

int main(int argc, char** argv) {
    CLI::App app{"quantum histories experiment runner"};
    app.set_version_flag("--version", qh_version());
    app.require_subcommand(0, 1);

    std::string config_path;
    CLI::App* run = app.add_subcommand("run", "run one experiment from a config file");
    run->add_option("config", config_path, "path to the experiment config")
        ->required();
    CLI::App* list = app.add_subcommand("list", "list the available experiment kinds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success))
            return app.exit(e);  // --help / --version
        app.exit(e);
        return QH_ERR_VALIDATION;
    }

    if (list->parsed()) {
        std::fputs(qh_list_experiments(), stdout);
        return QH_OK;
    }

    if (run->parsed()) {
        qh_run_result* result = nullptr;
        const int code = qh_run_experiment(config_path.c_str(), &result);
        if (code != QH_OK) {
            std::fprintf(stderr, "error: %s\n", qh_last_error());
            return code;
        }
        std::printf("wrote %s\n", qh_run_table_path(result));
        std::printf("wrote %s\n", qh_run_summary_path(result));
        qh_run_result_free(result);
        return QH_OK;
    }

    // bare invocation: short usage plus the experiment kinds
    std::fputs(app.help().c_str(), stdout);
    std::fputs("\nexperiment kinds:\n", stdout);
    std::fputs(qh_list_experiments(), stdout);
    return QH_OK;
}
