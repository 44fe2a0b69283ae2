#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coexsim/analysis.hpp"
#include "coexsim/devices.hpp"
#include "coexsim/pta.hpp"
#include "coexsim/sharedmem.hpp"
#include "coexsim/time.hpp"

namespace coexsim::attacks {

enum class Kind {
    kGrantRejectDos,
    kPriorityFloodDos,
    kBleBeaconDos,
    kKeystrokeSniff,
    kJitterClassify,
    kGrantGlitchObserve,
    kSharedmemExploit,
};

enum class AttackerCore { kBluetooth, kWifi };
enum class Verdict { kSuccess, kPartial, kFailed };

const char* to_string(Kind kind);
const char* to_string(AttackerCore core);
const char* to_string(Verdict verdict);
std::optional<Kind> kind_from_string(const std::string& name);
std::optional<AttackerCore> core_from_string(const std::string& name);

/// Which core the scenario hands to the attacker; fixed per attack kind.
AttackerCore attacker_core_of(Kind kind);

struct Report {
    Kind kind = Kind::kGrantRejectDos;
    Verdict verdict = Verdict::kFailed;
    std::uint64_t seed = 0;
    SimTime duration;
    nlohmann::json metrics;
    std::string trace_path = "trace.csv";

    nlohmann::json to_json() const;
};

struct RunOutput {
    Report report;
    std::string trace_csv;
    std::vector<shmem::CrashLog> crash_logs;
};

// --- Per-kind parameters (defaults reproduce the measured setups) -----------

struct GrantRejectParams {
    bool attack_enabled = true;
    SimTime attack_start = SimTime::from_s(2);
    SimTime attack_duration = SimTime::from_s(3);
    SimTime supervision_timeout = SimTime::from_s(5);
    SimTime tail = SimTime::from_s(2);
};

struct PriorityFloodParams {
    bool attack_enabled = true;
    pta::Mode mode = pta::Mode::kBalanced;
    bool use_priority = false;
    SimTime attack_start = SimTime::from_ms(300);
    SimTime attack_duration = SimTime::from_s(1);
    devices::PingStation::Params ping;
};

struct BeaconDosParams {
    bool attack_enabled = true;
    SimTime deny_at = SimTime::from_s(1);
    SimTime restore_at = SimTime::from_ms(1500);
    SimTime observe_until = SimTime::from_s(122);
    SimTime adv_interval = SimTime::from_ms(100);
    pta::Mode mode = pta::Mode::kBalanced;
};

struct KeystrokeSniffParams {
    bool attack_enabled = true;
    SimTime hid_interval = devices::kHidInterval30ms;
    unsigned press_count = 50;
    /// Explicit script; generated from the traffic stream when empty
    /// (spacing uniform in [2, 4] intervals, resolvable by construction).
    std::vector<SimTime> script;
};

struct JitterClassifyParams {
    bool attack_enabled = true;
    std::optional<analysis::TrafficClass> traffic;  // single observed stream
    unsigned n_samples = 500;                       // per class
    unsigned batch_size = 20;
    double spread_scale = 1.0;  // scales quartile/whisker spread around the median
};

struct GrantGlitchParams {
    bool attack_enabled = true;  // false disables the glitch defect entirely
    pta::Mode mode = pta::Mode::kWlanHigh;
    double load_mbps = 7.0;
    SimTime duration = SimTime::from_s(2);
};

struct SharedmemExploitParams {
    bool attack_enabled = true;  // false keeps the attacker passive
    bool wifi_on = true;
    bool associated = true;
    std::string ssid = "testnet";
    std::string passphrase = "hunter22";
    std::vector<std::uint32_t> exec_bt_addresses = {0x681024};
    double p_unstable = 0.05;
    SimTime budget = SimTime::from_s(90);
};

RunOutput run_grant_reject_dos(std::uint64_t seed, const GrantRejectParams& params);
RunOutput run_priority_flood_dos(std::uint64_t seed, const PriorityFloodParams& params);
RunOutput run_ble_beacon_dos(std::uint64_t seed, const BeaconDosParams& params);
RunOutput run_keystroke_sniff(std::uint64_t seed, const KeystrokeSniffParams& params);
RunOutput run_jitter_classify(std::uint64_t seed, const JitterClassifyParams& params);
RunOutput run_grant_glitch_observe(std::uint64_t seed, const GrantGlitchParams& params);
RunOutput run_sharedmem_exploit(std::uint64_t seed, const SharedmemExploitParams& params);

}  // namespace coexsim::attacks
