#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "coexsim/attacks.hpp"

namespace coexsim::scenario {

enum class Backend { kPta, kSeci, kComboSharedmem };

const char* to_string(Backend backend);
std::optional<Backend> backend_from_string(const std::string& name);

/// Declarative run description parsed from the JSON config document.
struct ScenarioConfig {
    std::uint64_t seed = 0;
    Backend backend = Backend::kPta;
    attacks::Kind kind = attacks::Kind::kPriorityFloodDos;
    attacks::AttackerCore attacker_core = attacks::AttackerCore::kBluetooth;
    nlohmann::json params;  // kind-specific record
    std::optional<SimTime> duration;
};

/// Parses and validates a config document. Throws ConfigError naming the
/// offending field on any problem (missing seed, backend/kind mismatch,
/// unknown enum values, bad durations).
ScenarioConfig parse_config(const nlohmann::json& doc);

ScenarioConfig load_config_file(const std::filesystem::path& path);

/// Applies a dot-path override ("attack.params.mode") to a config document.
void apply_override(nlohmann::json& doc, const std::string& dot_path, const nlohmann::json& value);

/// Builds the kind-specific parameter struct and runs the scenario.
attacks::RunOutput execute(const ScenarioConfig& config);

}  // namespace coexsim::scenario
