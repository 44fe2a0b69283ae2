#include "coexsim/scenario.hpp"

#include <fstream>

#include "coexsim/errors.hpp"

namespace coexsim::scenario {

const char* to_string(Backend backend) {
    switch (backend) {
        case Backend::kPta: return "pta";
        case Backend::kSeci: return "seci";
        case Backend::kComboSharedmem: return "combo_sharedmem";
    }
    return "?";
}

std::optional<Backend> backend_from_string(const std::string& name) {
    if (name == "pta") return Backend::kPta;
    if (name == "seci") return Backend::kSeci;
    if (name == "combo_sharedmem") return Backend::kComboSharedmem;
    return std::nullopt;
}

namespace {

Backend required_backend(attacks::Kind kind) {
    switch (kind) {
        case attacks::Kind::kGrantRejectDos:
        case attacks::Kind::kKeystrokeSniff:
            return Backend::kSeci;
        case attacks::Kind::kSharedmemExploit:
            return Backend::kComboSharedmem;
        case attacks::Kind::kPriorityFloodDos:
        case attacks::Kind::kBleBeaconDos:
        case attacks::Kind::kJitterClassify:
        case attacks::Kind::kGrantGlitchObserve:
            return Backend::kPta;
    }
    return Backend::kPta;
}

SimTime duration_field(const nlohmann::json& params, const char* field, SimTime fallback) {
    if (!params.contains(field)) return fallback;
    const auto& v = params.at(field);
    if (v.is_number_unsigned() || v.is_number_integer()) {
        return SimTime::from_ns(v.get<std::uint64_t>());
    }
    if (v.is_string()) return parse_duration(v.get<std::string>());
    throw ConfigError(std::string("attack.params.") + field, "expected duration string or ns integer");
}

pta::Mode mode_field(const nlohmann::json& params, const char* field, pta::Mode fallback) {
    if (!params.contains(field)) return fallback;
    const std::string name = params.at(field).get<std::string>();
    for (pta::Mode m : {pta::Mode::kCoexMaximized, pta::Mode::kCoexHigh, pta::Mode::kBalanced,
                        pta::Mode::kWlanHigh, pta::Mode::kWlanMaximized}) {
        if (name == pta::to_string(m)) return m;
    }
    throw ConfigError(std::string("attack.params.") + field, "unknown PTA mode '" + name + "'");
}

std::uint32_t address_field(const nlohmann::json& v, const char* field) {
    if (v.is_number_unsigned() || v.is_number_integer()) return v.get<std::uint32_t>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        try {
            return static_cast<std::uint32_t>(std::stoul(s, nullptr, 0));
        } catch (const std::exception&) {
            throw ConfigError(field, "bad address '" + s + "'");
        }
    }
    throw ConfigError(field, "expected address integer or hex string");
}

}  // namespace

ScenarioConfig parse_config(const nlohmann::json& doc) {
    ScenarioConfig cfg;

    if (!doc.contains("seed")) throw ConfigError("seed", "required field is missing");
    if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer()) {
        throw ConfigError("seed", "must be an unsigned integer");
    }
    cfg.seed = doc.at("seed").get<std::uint64_t>();

    if (!doc.contains("backend")) throw ConfigError("backend", "required field is missing");
    const auto backend = backend_from_string(doc.at("backend").get<std::string>());
    if (!backend) {
        throw ConfigError("backend", "must be one of pta, seci, combo_sharedmem");
    }
    cfg.backend = *backend;

    if (!doc.contains("attack")) throw ConfigError("attack", "required section is missing");
    const auto& attack = doc.at("attack");
    if (!attack.contains("kind")) throw ConfigError("attack.kind", "required field is missing");
    const auto kind = attacks::kind_from_string(attack.at("kind").get<std::string>());
    if (!kind) {
        throw ConfigError("attack.kind", "unknown attack kind '" +
                                             attack.at("kind").get<std::string>() + "'");
    }
    cfg.kind = *kind;

    if (!attack.contains("attacker_core")) {
        throw ConfigError("attack.attacker_core", "required field is missing");
    }
    const auto core = attacks::core_from_string(attack.at("attacker_core").get<std::string>());
    if (!core) throw ConfigError("attack.attacker_core", "must be bluetooth or wifi");
    cfg.attacker_core = *core;
    if (*core != attacks::attacker_core_of(cfg.kind)) {
        throw ConfigError("attack.attacker_core",
                          std::string("attack '") + attacks::to_string(cfg.kind) + "' requires " +
                              attacks::to_string(attacks::attacker_core_of(cfg.kind)) +
                              " code execution");
    }

    const Backend needed = required_backend(cfg.kind);
    if (cfg.backend != needed) {
        throw ConfigError("backend", std::string("attack '") + attacks::to_string(cfg.kind) +
                                         "' requires backend '" + to_string(needed) + "', got '" +
                                         to_string(cfg.backend) + "'");
    }

    cfg.params = attack.contains("params") ? attack.at("params") : nlohmann::json::object();
    if (!cfg.params.is_object()) throw ConfigError("attack.params", "must be an object");

    if (doc.contains("duration")) {
        const auto& v = doc.at("duration");
        cfg.duration = v.is_string() ? parse_duration(v.get<std::string>())
                                     : SimTime::from_ns(v.get<std::uint64_t>());
        const bool open_ended = cfg.kind == attacks::Kind::kBleBeaconDos ||
                                cfg.kind == attacks::Kind::kGrantGlitchObserve ||
                                cfg.kind == attacks::Kind::kSharedmemExploit;
        if (!open_ended) {
            throw ConfigError("duration",
                              "run length of this attack kind is derived from attack.params");
        }
    }
    return cfg;
}

ScenarioConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path.string() + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config", std::string("parse error: ") + e.what());
    }
    return parse_config(doc);
}

void apply_override(nlohmann::json& doc, const std::string& dot_path, const nlohmann::json& value) {
    nlohmann::json* node = &doc;
    std::size_t start = 0;
    for (;;) {
        const std::size_t dot = dot_path.find('.', start);
        const std::string key = dot_path.substr(start, dot - start);
        if (key.empty()) throw ConfigError("matrix", "empty key in override path '" + dot_path + "'");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

attacks::RunOutput execute(const ScenarioConfig& config) {
    const auto& p = config.params;
    switch (config.kind) {
        case attacks::Kind::kGrantRejectDos: {
            attacks::GrantRejectParams params;
            params.attack_enabled = p.value("enabled", true);
            params.attack_start = duration_field(p, "attack_start", params.attack_start);
            params.attack_duration = duration_field(p, "attack_duration", params.attack_duration);
            params.supervision_timeout =
                duration_field(p, "supervision_timeout", params.supervision_timeout);
            params.tail = duration_field(p, "tail", params.tail);
            return attacks::run_grant_reject_dos(config.seed, params);
        }
        case attacks::Kind::kPriorityFloodDos: {
            attacks::PriorityFloodParams params;
            params.attack_enabled = p.value("enabled", true);
            params.mode = mode_field(p, "mode", params.mode);
            params.use_priority = p.value("use_priority", false);
            params.attack_start = duration_field(p, "attack_start", params.attack_start);
            params.attack_duration = duration_field(p, "attack_duration", params.attack_duration);
            params.ping.period = duration_field(p, "ping_period", params.ping.period);
            params.ping.timeout = duration_field(p, "ping_timeout", params.ping.timeout);
            return attacks::run_priority_flood_dos(config.seed, params);
        }
        case attacks::Kind::kBleBeaconDos: {
            attacks::BeaconDosParams params;
            params.attack_enabled = p.value("enabled", true);
            params.deny_at = duration_field(p, "deny_at", params.deny_at);
            params.restore_at = duration_field(p, "restore_at", params.restore_at);
            params.observe_until = duration_field(p, "observe_until", params.observe_until);
            params.adv_interval = duration_field(p, "adv_interval", params.adv_interval);
            params.mode = mode_field(p, "mode", params.mode);
            if (config.duration) params.observe_until = *config.duration;
            return attacks::run_ble_beacon_dos(config.seed, params);
        }
        case attacks::Kind::kKeystrokeSniff: {
            attacks::KeystrokeSniffParams params;
            params.attack_enabled = p.value("enabled", true);
            params.hid_interval = duration_field(p, "hid_interval", params.hid_interval);
            params.press_count = p.value("press_count", params.press_count);
            if (p.contains("script")) {
                for (const auto& v : p.at("script")) {
                    params.script.push_back(v.is_string()
                                                ? parse_duration(v.get<std::string>())
                                                : SimTime::from_ns(v.get<std::uint64_t>()));
                }
            }
            return attacks::run_keystroke_sniff(config.seed, params);
        }
        case attacks::Kind::kJitterClassify: {
            attacks::JitterClassifyParams params;
            params.attack_enabled = p.value("enabled", true);
            params.n_samples = p.value("n_samples", params.n_samples);
            params.batch_size = p.value("batch_size", params.batch_size);
            params.spread_scale = p.value("spread_scale", params.spread_scale);
            if (p.contains("traffic")) {
                const std::string name = p.at("traffic").get<std::string>();
                bool known = false;
                for (auto c : {analysis::TrafficClass::kIdle, analysis::TrafficClass::kIndication,
                               analysis::TrafficClass::kNotification}) {
                    if (name == analysis::to_string(c)) {
                        params.traffic = c;
                        known = true;
                    }
                }
                if (!known) {
                    throw ConfigError("attack.params.traffic",
                                      "must be idle, indication or notification");
                }
            }
            return attacks::run_jitter_classify(config.seed, params);
        }
        case attacks::Kind::kGrantGlitchObserve: {
            attacks::GrantGlitchParams params;
            params.attack_enabled = p.value("enabled", true);
            params.mode = mode_field(p, "mode", params.mode);
            params.load_mbps = p.value("load_mbps", params.load_mbps);
            params.duration = duration_field(p, "duration", params.duration);
            if (config.duration) params.duration = *config.duration;
            return attacks::run_grant_glitch_observe(config.seed, params);
        }
        case attacks::Kind::kSharedmemExploit: {
            attacks::SharedmemExploitParams params;
            params.attack_enabled = p.value("enabled", true);
            params.wifi_on = p.value("wifi_on", true);
            params.associated = p.value("associated", true);
            params.ssid = p.value("ssid", params.ssid);
            params.passphrase = p.value("passphrase", params.passphrase);
            params.p_unstable = p.value("p_unstable", params.p_unstable);
            params.budget = duration_field(p, "budget", params.budget);
            if (config.duration) params.budget = *config.duration;
            if (p.contains("exec_addresses")) {
                params.exec_bt_addresses.clear();
                for (const auto& v : p.at("exec_addresses")) {
                    params.exec_bt_addresses.push_back(
                        address_field(v, "attack.params.exec_addresses"));
                }
            }
            return attacks::run_sharedmem_exploit(config.seed, params);
        }
    }
    throw Error("unhandled attack kind");
}

}  // namespace coexsim::scenario
