#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "coexsim/engine.hpp"
#include "coexsim/rng.hpp"
#include "coexsim/time.hpp"
#include "coexsim/trace.hpp"

namespace coexsim::pta {

inline constexpr SimTime kBtSlot = SimTime::from_us(625);
inline constexpr SimTime kSamplePeriod = SimTime::from_us(10);
inline constexpr SimTime kMaxRequestJitter = SimTime::from_ns(312'500);

/// Scheduling priority of the integrated controller, configured before the
/// Wi-Fi radio starts. Ordered from strongest Bluetooth preference to
/// strongest Wi-Fi preference.
enum class Mode {
    kCoexMaximized,
    kCoexHigh,
    kBalanced,
    kWlanHigh,
    kWlanMaximized,
};

const char* to_string(Mode mode);

struct Config {
    Mode mode = Mode::kBalanced;
    SimTime sample_period = kSamplePeriod;
    bool grant_glitch_enabled = true;

    // Wi-Fi share of slots when a Wi-Fi priority frame contends with a plain
    // Bluetooth request. The three Bluetooth-leaning modes are not separated
    // by the DoS outcome table, only by this cooperative split.
    unsigned coex_high_wifi_share_pct = 25;
    unsigned balanced_wifi_share_pct = 50;

    // WLAN_HIGH periodic denial: Bluetooth is refused during 1 slot of every
    // `denial_group_slots` consecutive 625 us slots.
    unsigned denial_group_slots = 4;

    // Glitch defect model: short GRANT drops under load.
    SimTime glitch_duration = SimTime::from_us(2);
    unsigned frames_per_glitch = 50;
    unsigned frame_bytes = 1500;
};

/// Sampled levels of the three arbitration wires. GRANT uses inverted logic:
/// grant=1 means the Bluetooth request is denied.
struct LineState {
    bool request = false;
    bool priority = false;
    bool grant = false;
};

enum class Winner { kNone, kBluetooth, kWifi };

enum class Reason {
    kIdle,            // neither side wants the medium
    kNoContention,    // only one side wants it
    kBtPriority,      // PRIORITY honoured by the mode
    kModePrefersBt,
    kModePrefersWifi,
    kPeriodicDenial,  // WLAN_HIGH duty-cycle refusal
    kWifiShareSlot,   // cooperative split slot given to Wi-Fi
    kForcedDeny,      // controller override (attack)
};

struct Decision {
    SimTime at;
    Winner winner = Winner::kNone;
    Reason reason = Reason::kIdle;
};

/// One arbitration round, evaluated every sample period.
Decision arbitrate_step(const LineState& lines, bool wifi_wants_tx, bool wifi_prio_tx,
                        const Config& cfg, SimTime at);

/// WLAN_HIGH only: true when the duty cycle denies Bluetooth at time t.
/// Throws PreconditionError for any other mode.
bool periodic_denial_schedule(const Config& cfg, SimTime t);

/// End of the contiguous Wi-Fi-favourable span containing `t` under
/// WLAN_HIGH's duty cycle (the controller is integrated into Wi-Fi, so the
/// Wi-Fi side legitimately knows its own schedule).
SimTime denial_span_end(const Config& cfg, SimTime t);

struct GlitchPulse {
    SimTime at;
    SimTime duration;
};

/// GRANT-glitch defect model: pulses only occur under Wi-Fi traffic and in
/// the WLAN_HIGH / WLAN_MAXIMIZED modes, at a load-proportional rate.
std::vector<GlitchPulse> inject_grant_glitch(double load_mbps, const Config& cfg,
                                             RngStream& stream, SimTime from, SimTime until);

enum class Role { kBluetooth, kWifi };

/// Piecewise-constant wire level with full-resolution history.
class LineSignal {
public:
    void set(SimTime at, bool level);
    bool at(SimTime t) const;
    bool latest() const;
    /// Number of falling edges in [from, until).
    std::size_t falling_edges(SimTime from, SimTime until) const;
    /// High-low-high excursions no wider than max_width (glitch signature).
    std::size_t short_low_pulses(SimTime from, SimTime until, SimTime max_width) const;

private:
    std::vector<std::pair<SimTime, bool>> changes_;
};

/// Three-wire PTA controller with the Silicon Labs behaviours: 10 us
/// sampling, five priority modes, inverted GRANT, and the glitch defect.
class Controller {
public:
    Controller(Engine& engine, TraceRecorder& trace, const Config& cfg);

    // Bluetooth side raises/lowers its wires at arbitrary instants.
    void set_request(SimTime at, bool level);
    void set_priority(SimTime at, bool level);

    // Wi-Fi side declares its pending traffic for the next rounds.
    void set_wifi_demand(bool wants_tx, bool prio_tx);

    /// Attack control: pin GRANT to denied regardless of arbitration.
    void set_force_deny(bool deny);

    /// Starts the sampling loop; decisions are delivered to the listener.
    void start(std::function<void(const Decision&)> on_decision);

    /// Applies defect pulses (GRANT pulled low) to the grant wire.
    void apply_glitches(const std::vector<GlitchPulse>& pulses);

    /// Wire levels as visible to on-chip code: quantized to the last 10 us
    /// sample boundary; sub-sample transitions are invisible.
    LineState observe_lines(SimTime at, Role role) const;

    const LineSignal& request_line() const { return request_; }
    const LineSignal& grant_line() const { return grant_; }
    const Config& config() const { return cfg_; }
    Decision last_decision() const { return last_decision_; }

private:
    void sample(SimTime at);

    Engine& engine_;
    TraceRecorder& trace_;
    Config cfg_;
    LineSignal request_;
    LineSignal priority_;
    LineSignal grant_;
    bool wifi_wants_tx_ = false;
    bool wifi_prio_tx_ = false;
    bool force_deny_ = false;
    Decision last_decision_;
    std::function<void(const Decision&)> on_decision_;
};

}  // namespace coexsim::pta
