// test_capi.cpp — C interface: status codes, error text, run handles, and
// on-disk outputs driven purely through qhist.h

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qhist.h"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

fs::path test_dir() {
    const fs::path dir = fs::temp_directory_path() / "qhist_test_capi";
    fs::create_directories(dir);
    return dir;
}

fs::path write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    return p;
}

std::string interference_config(const fs::path& dir) {
    Json j = Json::parse(R"({
        "kind": "consistency",
        "label": "capi smoke",
        "output": {"table": "", "summary": ""},
        "system": {
            "hamiltonian": [[[0.8, 0], [0, 0]], [[0, 0], [-0.8, 0]]],
            "initial_state": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]
        },
        "params": {
            "times": [0.2, 0.9],
            "histories": [
                [{"vector": [[1, 0], [1, 0]]}, {"vector": [[1, 0], [0, 0]]}],
                [{"vector": [[1, 0], [-1, 0]]}, {"vector": [[1, 0], [0, 0]]}]
            ],
            "additivity_pair": [0, 1]
        }
    })");
    j["output"]["table"] = (dir / "capi.csv").string();
    j["output"]["summary"] = (dir / "capi.json").string();
    return j.dump(2) + "\n";
}

}  // namespace

TEST_CASE("version and listing come back as stable static strings") {
    CHECK(std::string(qh_version()) == "qhist 0.1.0");
    const std::string listing = qh_list_experiments();
    CHECK(listing.find("consistency") != std::string::npos);
    CHECK(listing.find("stochastic-limit") != std::string::npos);
    int lines = 0;
    for (char c : listing)
        if (c == '\n')
            ++lines;
    CHECK(lines == 7);
    CHECK(qh_list_experiments() == qh_list_experiments());  // same buffer
}

TEST_CASE("failures map to status codes and record an error message") {
    int sentinel = 0;
    qh_run_result* result = reinterpret_cast<qh_run_result*>(&sentinel);
    CHECK(qh_run_experiment(nullptr, &result) == QH_ERR_VALIDATION);
    CHECK(result == nullptr);  // cleared even on failure
    CHECK(std::string(qh_last_error()).size() > 0);

    const fs::path dir = test_dir();
    CHECK(qh_run_experiment((dir / "missing.json").string().c_str(), &result) ==
          QH_ERR_VALIDATION);
    CHECK(result == nullptr);

    const fs::path garbled = write_text(dir / "garbled.json", "{ not json");
    CHECK(qh_run_experiment(garbled.string().c_str(), &result) == QH_ERR_VALIDATION);
    CHECK(std::string(qh_last_error()).find("config") != std::string::npos);

    Json cap = Json::parse(R"({
        "kind": "coherent-action",
        "label": "too big",
        "output": {"table": "", "summary": ""},
        "system": {"ncut": 300, "omega": 1.0},
        "params": {"t0": 0.0, "t1": 0.5,
                   "path_a": {"radius": 0.5}, "path_b": {"radius": 0.4},
                   "n_sweep": [4, 8]}
    })");
    cap["output"]["table"] = (dir / "cap.csv").string();
    cap["output"]["summary"] = (dir / "cap.json").string();
    const fs::path cap_path = write_text(dir / "cap_config.json", cap.dump());
    CHECK(qh_run_experiment(cap_path.string().c_str(), &result) == QH_ERR_CAP);
    CHECK(std::string(qh_last_error()).find("cap") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "cap.csv"));

    Json unknown = cap;
    unknown["kind"] = "coherent-actoin";
    const fs::path unknown_path = write_text(dir / "unknown_kind.json", unknown.dump());
    CHECK(qh_run_experiment(unknown_path.string().c_str(), &result) == QH_ERR_VALIDATION);
    CHECK(std::string(qh_last_error()).find("coherent-action") != std::string::npos);
}

TEST_CASE("successful run writes both outputs and clears the error text") {
    const fs::path dir = test_dir();
    const fs::path cfg = write_text(dir / "good.json", interference_config(dir));

    qh_run_result* result = nullptr;
    REQUIRE(qh_run_experiment(cfg.string().c_str(), &result) == QH_OK);
    REQUIRE(result != nullptr);
    CHECK(std::string(qh_last_error()).empty());

    const std::string table_path = qh_run_table_path(result);
    const std::string summary_path = qh_run_summary_path(result);
    CHECK(table_path == (dir / "capi.csv").string());
    CHECK(summary_path == (dir / "capi.json").string());
    REQUIRE(fs::exists(table_path));
    REQUIRE(fs::exists(summary_path));

    std::ifstream in(summary_path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    const Json summary = Json::parse(buf.str());
    CHECK(summary.at("results").at("additivity").at("defect").get<double>() ==
          doctest::Approx(0.5).epsilon(1e-10));

    qh_run_result_free(result);
    qh_run_result_free(nullptr);  // harmless

    // out handle is optional; files are still produced
    fs::remove(table_path);
    fs::remove(summary_path);
    CHECK(qh_run_experiment(cfg.string().c_str(), nullptr) == QH_OK);
    CHECK(fs::exists(table_path));
    CHECK(fs::exists(summary_path));

    fs::remove_all(dir);
}
