#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

namespace coexsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;

/// Runs one scenario and writes trace.csv, report.json and crash-log
/// directories into out_dir. Exit 0 on clean completion whatever the attack
/// verdict; 2 on config errors (diagnostic on stderr); 1 on internal failure.
int run_command(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                std::optional<std::uint64_t> seed_override,
                const std::optional<std::string>& duration_override);

/// Runs the cell matrix: one sub-directory per cell plus summary.csv. A
/// failing cell is marked error and the remaining cells still run (exit 1).
int sweep_command(const std::filesystem::path& config_path,
                  const std::filesystem::path& matrix_path, const std::filesystem::path& out_dir,
                  std::optional<std::uint64_t> seed_override, unsigned jobs);

/// Structural check of a report document against the published schema.
bool report_json_valid(const nlohmann::json& report, std::string* why = nullptr);

int main_entry(int argc, const char* const* argv);

}  // namespace coexsim::cli
