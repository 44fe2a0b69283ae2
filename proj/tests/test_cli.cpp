#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "coexsim/cli.hpp"
#include "coexsim/errors.hpp"
#include "coexsim/scenario.hpp"

using namespace coexsim;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("cli");

namespace {

struct TempDir {
    TempDir() {
        path = fs::temp_directory_path() /
               ("coexsim-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path file(const std::string& name, const std::string& content) const {
        const fs::path p = path / name;
        std::ofstream out(p);
        out << content;
        return p;
    }
    static inline int counter = 0;
    fs::path path;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kFloodConfig = R"({
  "seed": 7,
  "backend": "pta",
  "attack": {
    "kind": "priority_flood_dos",
    "attacker_core": "bluetooth",
    "params": {"mode": "BALANCED", "use_priority": true}
  }
})";

}  // namespace

TEST_CASE("run: a valid config produces trace, report and exit 0") {
    TempDir tmp;
    const auto config = tmp.file("flood.json", kFloodConfig);
    const auto out_dir = tmp.path / "out";
    CHECK(cli::run_command(config, out_dir, std::nullopt, std::nullopt) == cli::kExitOk);
    CHECK(fs::exists(out_dir / "trace.csv"));
    CHECK(fs::exists(out_dir / "report.json"));

    const auto report = nlohmann::json::parse(slurp(out_dir / "report.json"));
    std::string why;
    CHECK(cli::report_json_valid(report, &why));
    CHECK(report.at("verdict") == "success");
}

TEST_CASE("run: backend/kind mismatch exits 2 with a diagnostic") {
    TempDir tmp;
    const auto config = tmp.file("bad.json", R"({
      "seed": 1,
      "backend": "pta",
      "attack": {"kind": "sharedmem_exploit", "attacker_core": "bluetooth"}
    })");
    CHECK(cli::run_command(config, tmp.path / "out", std::nullopt, std::nullopt) ==
          cli::kExitConfig);
}

TEST_CASE("run: a missing seed exits 2") {
    TempDir tmp;
    const auto config = tmp.file("noseed.json", R"({
      "backend": "pta",
      "attack": {"kind": "ble_beacon_dos", "attacker_core": "wifi"}
    })");
    CHECK(cli::run_command(config, tmp.path / "out", std::nullopt, std::nullopt) ==
          cli::kExitConfig);
}

TEST_CASE("run: wrong attacker core for the kind exits 2") {
    TempDir tmp;
    const auto config = tmp.file("core.json", R"({
      "seed": 1,
      "backend": "pta",
      "attack": {"kind": "priority_flood_dos", "attacker_core": "wifi"}
    })");
    CHECK(cli::run_command(config, tmp.path / "out", std::nullopt, std::nullopt) ==
          cli::kExitConfig);
}

TEST_CASE("run: identical config and seed give byte-identical traces") {
    TempDir tmp;
    const auto config = tmp.file("flood.json", kFloodConfig);
    REQUIRE(cli::run_command(config, tmp.path / "a", std::nullopt, std::nullopt) == cli::kExitOk);
    REQUIRE(cli::run_command(config, tmp.path / "b", std::nullopt, std::nullopt) == cli::kExitOk);
    CHECK(slurp(tmp.path / "a" / "trace.csv") == slurp(tmp.path / "b" / "trace.csv"));

    REQUIRE(cli::run_command(config, tmp.path / "c", 8, std::nullopt) == cli::kExitOk);
    CHECK(slurp(tmp.path / "a" / "trace.csv") != slurp(tmp.path / "c" / "trace.csv"));
}

TEST_CASE("sweep: the DoS matrix yields one directory per cell and a summary") {
    TempDir tmp;
    const auto config = tmp.file("flood.json", kFloodConfig);
    nlohmann::json matrix;
    matrix["cells"] = nlohmann::json::array();
    for (const char* mode : {"COEX_MAXIMIZED", "COEX_HIGH", "BALANCED", "WLAN_HIGH",
                             "WLAN_MAXIMIZED"}) {
        for (bool prio : {false, true}) {
            matrix["cells"].push_back(
                {{"name", std::string(mode) + (prio ? "_prio" : "_noprio")},
                 {"overrides",
                  {{"attack.params.mode", mode}, {"attack.params.use_priority", prio}}}});
        }
    }
    const auto matrix_path = tmp.file("matrix.json", matrix.dump());
    const auto out_dir = tmp.path / "sweep";
    CHECK(cli::sweep_command(config, matrix_path, out_dir, std::nullopt, 4) == cli::kExitOk);

    const std::string summary = slurp(out_dir / "summary.csv");
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 11);  // header + 10 cells
    CHECK(fs::exists(out_dir / "BALANCED_prio" / "report.json"));
    CHECK(summary.find("WLAN_HIGH_noprio,priority_flood_dos,partial,degraded") !=
          std::string::npos);
    CHECK(summary.find("WLAN_MAXIMIZED_prio,priority_flood_dos,failed,unaffected") !=
          std::string::npos);
}

TEST_CASE("sweep: an empty matrix still writes a summary and exits 0") {
    TempDir tmp;
    const auto config = tmp.file("flood.json", kFloodConfig);
    const auto matrix_path = tmp.file("matrix.json", R"({"cells": []})");
    CHECK(cli::sweep_command(config, matrix_path, tmp.path / "out", std::nullopt, 1) ==
          cli::kExitOk);
    CHECK(slurp(tmp.path / "out" / "summary.csv") == "cell,kind,verdict,outcome,detail\n");
}

TEST_CASE("sweep: an invalid cell is marked error, other cells finish, exit 1") {
    TempDir tmp;
    const auto config = tmp.file("flood.json", kFloodConfig);
    const auto matrix_path = tmp.file("matrix.json", R"({
      "cells": [
        {"name": "ok", "overrides": {"attack.params.mode": "BALANCED"}},
        {"name": "broken", "overrides": {"attack.params.mode": "TURBO"}}
      ]
    })");
    const auto out_dir = tmp.path / "out";
    CHECK(cli::sweep_command(config, matrix_path, out_dir, std::nullopt, 2) == cli::kExitInternal);
    const std::string summary = slurp(out_dir / "summary.csv");
    CHECK(summary.find("ok,priority_flood_dos,success") != std::string::npos);
    CHECK(summary.find("broken,,error") != std::string::npos);
    CHECK(fs::exists(out_dir / "ok" / "report.json"));
}

TEST_CASE("config parsing accepts duration overrides only where they apply") {
    nlohmann::json doc = nlohmann::json::parse(kFloodConfig);
    doc["duration"] = "5s";
    CHECK_THROWS_AS(scenario::parse_config(doc), ConfigError);

    nlohmann::json beacon = {
        {"seed", 1},
        {"backend", "pta"},
        {"duration", "10s"},
        {"attack", {{"kind", "ble_beacon_dos"}, {"attacker_core", "wifi"}}},
    };
    const auto cfg = scenario::parse_config(beacon);
    REQUIRE(cfg.duration.has_value());
    CHECK(*cfg.duration == SimTime::from_s(10));
}

TEST_CASE("every shipped example config parses and names a runnable scenario") {
    const fs::path dir = COEXSIM_CONFIG_DIR;
    std::size_t seen = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().filename() == "dos_matrix.json") continue;  // matrix, not a scenario
        CAPTURE(entry.path().string());
        CHECK_NOTHROW(scenario::load_config_file(entry.path()));
        ++seen;
    }
    CHECK(seen >= 7);
}

TEST_CASE("the installed binary runs end to end") {
    TempDir tmp;
    const auto config = tmp.file("flood.json", kFloodConfig);
    const auto out_dir = tmp.path / "out";
    const std::string cmd = std::string(COEXSIM_CLI_PATH) + " run " + config.string() + " --out " +
                            out_dir.string() + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    CHECK(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(fs::exists(out_dir / "report.json"));
}

TEST_SUITE_END();
