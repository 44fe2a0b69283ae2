#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coexsim/medium.hpp"
#include "coexsim/pta.hpp"
#include "coexsim/seci.hpp"

namespace coexsim::devices {

inline constexpr SimTime kAclCadence = SimTime::from_us(1250);  // 2 Bluetooth slots
inline constexpr SimTime kKeepaliveInterval = SimTime::from_s(1);

/// HID report intervals seen on real keyboards.
inline constexpr SimTime kHidInterval12_5ms = SimTime::from_us(12'500);
inline constexpr SimTime kHidInterval15ms = SimTime::from_ms(15);
inline constexpr SimTime kHidInterval30ms = SimTime::from_ms(30);

struct BtDeviceProfile {
    enum class Role { kBeacon, kAudioStream, kHidKeyboard };
    Role role = Role::kBeacon;
    SimTime hid_interval = kHidInterval15ms;  // one of the supported set
    SimTime supervision_timeout = SimTime::from_s(5);
    bool latched_stop = false;  // beacon permanent-stop state

    static BtDeviceProfile beacon();
    static BtDeviceProfile audio_stream();
    /// Throws ConfigError if the interval is not a supported HID timing.
    static BtDeviceProfile hid_keyboard(SimTime interval);
};

struct WifiDeviceProfile {
    enum class Role { kScanner, kAccessPoint, kStationLoad };
    Role role = Role::kAccessPoint;
    int channel = 6;
    int bandwidth_mhz = 20;
    double offered_load_mbps = 0.0;
};

struct KeystrokeScript {
    std::vector<SimTime> press_times;  // strictly increasing

    /// Throws PreconditionError if times are not strictly increasing.
    static KeystrokeScript from_times(std::vector<SimTime> times);
};

/// HID report for the window (at - hid_interval, at]: 0x85 when at least one
/// scripted press falls inside, 0x05 otherwise.
std::uint8_t hid_tick(const BtDeviceProfile& profile, const KeystrokeScript& script, SimTime at);

enum class BeaconAction { kAdvertise, kSuppressed };

/// One advertising round. A single denied grant sets the permanent latch;
/// once latched the beacon never advertises again, whatever later grants say.
BeaconAction beacon_tick(BtDeviceProfile& profile, bool grant_denied, SimTime at);

enum class LinkHealth { kAlive, kKeepaliveOnly, kTimedOut };

/// Link supervision: data flowing at the profile's cadence is alive; a
/// blocked link survives on keep-alives until the supervision timeout.
LinkHealth connection_supervise(SimTime last_data_at, SimTime now, const BtDeviceProfile& profile);

struct ScanEmission {
    SimTime at;
    seci::Payload payload;
};

inline const seci::Payload kScanStartPayload{0xfe, 0xdb, 0xe1, 0xdb, 0x3c};

/// Serial pattern of a Wi-Fi access-point scan: two peaks at the start (the
/// first decoding to fe db e1 db 3c), optional intermediate result messages,
/// and one terminal peak. Non-scanner profiles emit nothing.
std::vector<ScanEmission> wifi_scan(const WifiDeviceProfile& profile, SimTime at,
                                    int intermediate_count = 0);

// --- Scenario drivers -------------------------------------------------------
// Event-loop glue wiring the pure device behaviours into the engine. Each
// driver owns one endpoint's state and touches other cores only through the
// coexistence interfaces (PTA wires, SECI registers, the shared medium).

/// Bluetooth HID keyboard reporting over SECI at its fixed interval.
class HidKeyboard {
public:
    HidKeyboard(Engine& engine, TraceRecorder& trace, seci::Link& link, Medium& medium,
                BtDeviceProfile profile, KeystrokeScript script, std::string id);
    void start(SimTime first_tick);

    std::uint64_t reports_sent() const { return reports_; }

private:
    Engine& engine_;
    TraceRecorder& trace_;
    seci::Link& link_;
    Medium& medium_;
    BtDeviceProfile profile_;
    KeystrokeScript script_;
    std::string id_;
    std::uint64_t reports_ = 0;
    std::uint64_t slot_ = 0;
};

/// Bluetooth audio stream: ACL data every two slots, gated by the SECI
/// grant/reject cycle, with keep-alive nulls while blocked.
class AudioStream {
public:
    AudioStream(Engine& engine, TraceRecorder& trace, seci::Link& link, Medium& medium,
                BtDeviceProfile profile, std::string id);

    /// wifi_active / withhold are read each cycle (attacker-controlled).
    void start(std::function<bool()> wifi_active_24ghz, std::function<bool()> attack_withhold);

    std::uint64_t data_frames() const { return data_frames_; }
    std::uint64_t keepalives() const { return keepalives_; }
    LinkHealth health() const { return health_; }
    std::uint64_t data_frames_in(SimTime from, SimTime until) const;
    std::uint64_t keepalives_in(SimTime from, SimTime until) const;

private:
    void cycle(SimTime at, bool wifi_active, bool withhold);

    Engine& engine_;
    TraceRecorder& trace_;
    seci::Link& link_;
    Medium& medium_;
    BtDeviceProfile profile_;
    std::string id_;
    SimTime last_data_at_;
    SimTime last_keepalive_at_;
    LinkHealth health_ = LinkHealth::kAlive;
    std::uint64_t data_frames_ = 0;
    std::uint64_t keepalives_ = 0;
    std::uint64_t slot_ = 0;
    std::vector<SimTime> data_times_;
    std::vector<SimTime> keepalive_times_;
};

/// BLE advertiser on the PTA wires; a denied grant latches it off for good.
class BleBeacon {
public:
    BleBeacon(Engine& engine, TraceRecorder& trace, pta::Controller& controller, Medium& medium,
              BtDeviceProfile profile, std::string id, SimTime adv_interval = SimTime::from_ms(100));
    void start(SimTime first_adv);

    std::uint64_t advertisements() const { return adverts_; }
    std::uint64_t advertisements_in(SimTime from, SimTime until) const;
    bool latched() const { return profile_.latched_stop; }

private:
    void advertise_round(SimTime at);

    Engine& engine_;
    TraceRecorder& trace_;
    pta::Controller& controller_;
    Medium& medium_;
    BtDeviceProfile profile_;
    std::string id_;
    SimTime adv_interval_;
    std::uint64_t adverts_ = 0;
    std::vector<SimTime> advert_times_;
    int adv_hop_index_ = 0;
};

/// Wi-Fi station issuing periodic pings that need an arbitration win long
/// enough for the whole frame before the ping deadline.
class PingStation {
public:
    struct Params {
        SimTime period = SimTime::from_ns(9'400'000);
        SimTime timeout = SimTime::from_ms(2);
        SimTime frame_duration = SimTime::from_us(300);
        int channel = 6;
        int bandwidth_mhz = 20;
    };
    struct Sample {
        SimTime issued;
        std::optional<SimTime> completed;  // nullopt = lost
    };

    PingStation(Engine& engine, TraceRecorder& trace, pta::Controller& controller, Medium& medium,
                Params params, RngStream& traffic, std::string id);
    void start(SimTime first_ping);

    /// Call from the controller's decision callback each sample period.
    void on_decision(const pta::Decision& decision);

    const std::vector<Sample>& samples() const { return samples_; }

private:
    void issue(SimTime at);

    Engine& engine_;
    TraceRecorder& trace_;
    pta::Controller& controller_;
    Medium& medium_;
    Params params_;
    std::string id_;
    SimTime phase_offset_;
    std::optional<SimTime> pending_issue_;
    bool tx_active_ = false;
    std::vector<Sample> samples_;
};

/// Bluetooth attacker holding REQUEST (and optionally PRIORITY) high and
/// transmitting in every slot it wins. Protocol-compliant: it never
/// transmits against a denied grant.
class RequestFlooder {
public:
    RequestFlooder(Engine& engine, TraceRecorder& trace, pta::Controller& controller,
                   Medium& medium, bool use_priority, std::string id);
    void start(SimTime attack_start, SimTime attack_end);

private:
    void slot_tick(SimTime at);

    Engine& engine_;
    TraceRecorder& trace_;
    pta::Controller& controller_;
    Medium& medium_;
    bool use_priority_;
    std::string id_;
    SimTime attack_end_;
    std::uint64_t slot_ = 0;
};

}  // namespace coexsim::devices
