#include "coexsim/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "coexsim/errors.hpp"
#include "coexsim/scenario.hpp"
#include "coexsim/sharedmem.hpp"

namespace coexsim::cli {

namespace {

int log_level() {
    const char* env = std::getenv("COEXSIM_LOG");
    if (!env) return 0;
    const std::string v = env;
    if (v == "debug") return 2;
    if (v == "info") return 1;
    return 0;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::fprintf(stderr, "coexsim: %s\n", msg.c_str());
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

void export_run(const attacks::RunOutput& output, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_file(out_dir / "trace.csv", output.trace_csv);
    write_file(out_dir / "report.json", output.report.to_json().dump(2) + "\n");
    for (std::size_t i = 0; i < output.crash_logs.size(); ++i) {
        char name[48];
        std::snprintf(name, sizeof name, "%03zu_trap%u", i, output.crash_logs[i].cause);
        shmem::export_crash_log(output.crash_logs[i], out_dir / "crashes" / name);
    }
}

struct Cell {
    std::string name;
    nlohmann::json overrides;
};

std::vector<Cell> load_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("matrix", "cannot open '" + path.string() + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("matrix", std::string("parse error: ") + e.what());
    }
    if (!doc.contains("cells") || !doc.at("cells").is_array()) {
        throw ConfigError("matrix.cells", "required array is missing");
    }
    std::vector<Cell> cells;
    for (const auto& c : doc.at("cells")) {
        if (!c.contains("name")) throw ConfigError("matrix.cells[].name", "required");
        cells.push_back({c.at("name").get<std::string>(),
                         c.contains("overrides") ? c.at("overrides") : nlohmann::json::object()});
    }
    return cells;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

bool report_json_valid(const nlohmann::json& report, std::string* why) {
    const auto fail = [&](const std::string& message) {
        if (why) *why = message;
        return false;
    };
    if (!report.is_object()) return fail("report must be an object");
    for (const char* key : {"kind", "attacker_core", "verdict", "seed", "duration_ns", "metrics",
                            "trace_path"}) {
        if (!report.contains(key)) return fail(std::string("missing field '") + key + "'");
    }
    if (!report.at("kind").is_string() || !attacks::kind_from_string(report.at("kind"))) {
        return fail("kind must name a known attack");
    }
    if (!report.at("attacker_core").is_string() ||
        !attacks::core_from_string(report.at("attacker_core"))) {
        return fail("attacker_core must be bluetooth or wifi");
    }
    const std::string verdict = report.at("verdict").is_string() ? report.at("verdict") : "";
    if (verdict != "success" && verdict != "partial" && verdict != "failed") {
        return fail("verdict must be success, partial or failed");
    }
    if (!report.at("seed").is_number()) return fail("seed must be a number");
    if (!report.at("duration_ns").is_number()) return fail("duration_ns must be a number");
    if (!report.at("metrics").is_object()) return fail("metrics must be an object");
    if (!report.at("trace_path").is_string()) return fail("trace_path must be a string");
    return true;
}

int run_command(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                std::optional<std::uint64_t> seed_override,
                const std::optional<std::string>& duration_override) {
    try {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "config error: config: cannot open '" << config_path.string() << "'\n";
            return kExitConfig;
        }
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kExitConfig;
        }
        if (seed_override) doc["seed"] = *seed_override;
        if (duration_override) doc["duration"] = *duration_override;

        scenario::ScenarioConfig config;
        try {
            config = scenario::parse_config(doc);
        } catch (const ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kExitConfig;
        }

        log_info("running " + std::string(attacks::to_string(config.kind)) + " seed " +
                 std::to_string(config.seed));
        attacks::RunOutput output = scenario::execute(config);
        export_run(output, out_dir);
        log_info("verdict " + std::string(attacks::to_string(output.report.verdict)));
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
}

int sweep_command(const std::filesystem::path& config_path,
                  const std::filesystem::path& matrix_path, const std::filesystem::path& out_dir,
                  std::optional<std::uint64_t> seed_override, unsigned jobs) {
    nlohmann::json base;
    std::vector<Cell> cells;
    try {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "config error: config: cannot open '" << config_path.string() << "'\n";
            return kExitConfig;
        }
        try {
            base = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kExitConfig;
        }
        if (seed_override) base["seed"] = *seed_override;
        cells = load_matrix(matrix_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    struct Row {
        std::string name;
        std::string kind;
        std::string verdict;
        std::string outcome;
        std::string detail;
        bool error = false;
    };
    std::vector<Row> rows(cells.size());

    std::atomic<std::size_t> next{0};
    std::mutex io_mutex;
    const unsigned workers = std::max(1u, std::min<unsigned>(jobs, cells.size() ? cells.size() : 1));

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            Row& row = rows[i];
            row.name = cells[i].name;
            try {
                nlohmann::json doc = base;
                for (const auto& [path, value] : cells[i].overrides.items()) {
                    scenario::apply_override(doc, path, value);
                }
                const scenario::ScenarioConfig config = scenario::parse_config(doc);
                const attacks::RunOutput output = scenario::execute(config);
                {
                    std::lock_guard<std::mutex> lock(io_mutex);
                    export_run(output, out_dir / cells[i].name);
                }
                row.kind = attacks::to_string(output.report.kind);
                row.verdict = attacks::to_string(output.report.verdict);
                if (output.report.metrics.contains("outcome")) {
                    row.outcome = output.report.metrics.at("outcome").get<std::string>();
                }
                if (output.report.metrics.contains("loss_pct")) {
                    char buf[32];
                    std::snprintf(buf, sizeof buf, "%.1f",
                                  output.report.metrics.at("loss_pct").get<double>());
                    row.detail = buf;
                }
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(io_mutex);
                std::cerr << "cell '" << cells[i].name << "' failed: " << e.what() << "\n";
                row.verdict = "error";
                row.detail = e.what();
                row.error = true;
            }
        }
    };

    std::vector<std::thread> pool;
    for (unsigned i = 0; i + 1 < workers; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    try {
        std::filesystem::create_directories(out_dir);
        std::ofstream summary(out_dir / "summary.csv");
        summary << "cell,kind,verdict,outcome,detail\n";
        for (const auto& row : rows) {
            summary << csv_escape(row.name) << ',' << row.kind << ',' << row.verdict << ','
                    << row.outcome << ',' << csv_escape(row.detail) << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }

    const bool any_error =
        std::any_of(rows.begin(), rows.end(), [](const Row& r) { return r.error; });
    return any_error ? kExitInternal : kExitOk;
}

int main_entry(int argc, const char* const* argv) {
    CLI::App app{"Deterministic desk-scale simulator of Bluetooth/Wi-Fi coexistence attacks"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> duration;

    auto* run = app.add_subcommand("run", "Run one scenario");
    run->add_option("config", config_path, "Scenario config (JSON)")->required();
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_option("--seed", seed, "Seed override");
    run->add_option("--duration", duration, "Run-length override (e.g. 120s)");

    std::string matrix_path;
    unsigned jobs = 1;
    auto* sweep = app.add_subcommand("sweep", "Run a parameter matrix");
    sweep->add_option("config", config_path, "Scenario config (JSON)")->required();
    sweep->add_option("--matrix", matrix_path, "Matrix spec (JSON)")->required();
    sweep->add_option("--out", out_dir, "Output directory")->required();
    sweep->add_option("--seed", seed, "Seed override for all cells");
    sweep->add_option("--jobs", jobs, "Parallel cells");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    if (run->parsed()) return run_command(config_path, out_dir, seed, duration);
    return sweep_command(config_path, matrix_path, out_dir, seed, jobs);
}

}  // namespace coexsim::cli
