#include "coexsim/pta.hpp"

#include <algorithm>
#include <cmath>

#include "coexsim/errors.hpp"

namespace coexsim::pta {

const char* to_string(Mode mode) {
    switch (mode) {
        case Mode::kCoexMaximized: return "COEX_MAXIMIZED";
        case Mode::kCoexHigh: return "COEX_HIGH";
        case Mode::kBalanced: return "BALANCED";
        case Mode::kWlanHigh: return "WLAN_HIGH";
        case Mode::kWlanMaximized: return "WLAN_MAXIMIZED";
    }
    return "?";
}

namespace {

std::uint64_t slot_index(SimTime t) { return t.ns() / kBtSlot.ns(); }

// Deterministic cooperative split: Wi-Fi takes the first `share` slots of
// every 100-slot cycle when its priority frames contend with plain requests.
bool wifi_share_slot(unsigned share_pct, SimTime t) {
    return slot_index(t) % 100 < share_pct;
}

}  // namespace

bool periodic_denial_schedule(const Config& cfg, SimTime t) {
    if (cfg.mode != Mode::kWlanHigh) {
        throw PreconditionError("periodic_denial_schedule: mode must be WLAN_HIGH");
    }
    return slot_index(t) % cfg.denial_group_slots == 0;
}

SimTime denial_span_end(const Config& cfg, SimTime t) {
    if (!periodic_denial_schedule(cfg, t)) return t;
    return SimTime::from_ns((slot_index(t) + 1) * kBtSlot.ns());
}

Decision arbitrate_step(const LineState& lines, bool wifi_wants_tx, bool wifi_prio_tx,
                        const Config& cfg, SimTime at) {
    Decision d{at, Winner::kNone, Reason::kIdle};

    if (!lines.request && !wifi_wants_tx) return d;
    if (lines.request && !wifi_wants_tx) {
        d.winner = Winner::kBluetooth;
        d.reason = Reason::kNoContention;
        return d;
    }
    if (!lines.request) {
        d.winner = Winner::kWifi;
        d.reason = Reason::kNoContention;
        return d;
    }

    // Contention. The outcome matrix reproduces the measured DoS table:
    // the three Bluetooth-leaning modes always yield to a request, WLAN_HIGH
    // yields except on its denial duty cycle (unless PRIORITY is set), and
    // WLAN_MAXIMIZED never yields.
    switch (cfg.mode) {
        case Mode::kWlanMaximized:
            d.winner = Winner::kWifi;
            d.reason = Reason::kModePrefersWifi;
            return d;
        case Mode::kWlanHigh:
            if (lines.priority) {
                d.winner = Winner::kBluetooth;
                d.reason = Reason::kBtPriority;
            } else if (wifi_prio_tx) {
                // Wi-Fi schedules its own priority frames without asking.
                d.winner = Winner::kWifi;
                d.reason = Reason::kModePrefersWifi;
            } else if (periodic_denial_schedule(cfg, at)) {
                d.winner = Winner::kWifi;
                d.reason = Reason::kPeriodicDenial;
            } else {
                d.winner = Winner::kBluetooth;
                d.reason = Reason::kModePrefersBt;
            }
            return d;
        case Mode::kCoexMaximized:
        case Mode::kCoexHigh:
        case Mode::kBalanced:
            if (wifi_prio_tx && !lines.priority) {
                const unsigned share = cfg.mode == Mode::kCoexMaximized ? 0
                                       : cfg.mode == Mode::kCoexHigh  ? cfg.coex_high_wifi_share_pct
                                                                      : cfg.balanced_wifi_share_pct;
                if (wifi_share_slot(share, at)) {
                    d.winner = Winner::kWifi;
                    d.reason = Reason::kWifiShareSlot;
                    return d;
                }
            }
            d.winner = Winner::kBluetooth;
            d.reason = lines.priority ? Reason::kBtPriority : Reason::kModePrefersBt;
            return d;
    }
    return d;
}

std::vector<GlitchPulse> inject_grant_glitch(double load_mbps, const Config& cfg,
                                             RngStream& stream, SimTime from, SimTime until) {
    std::vector<GlitchPulse> pulses;
    const bool eligible_mode = cfg.mode == Mode::kWlanHigh || cfg.mode == Mode::kWlanMaximized;
    if (load_mbps <= 0.0 || !eligible_mode || !cfg.grant_glitch_enabled) return pulses;
    if (until <= from) return pulses;

    const double frames_per_s = load_mbps * 1e6 / (cfg.frame_bytes * 8.0);
    const double glitch_rate = frames_per_s / cfg.frames_per_glitch;  // per second
    if (glitch_rate <= 0.0) return pulses;

    // Poisson arrivals via exponential gaps.
    double t_ns = static_cast<double>(from.ns());
    const double end_ns = static_cast<double>(until.ns());
    for (;;) {
        double u = stream.next_unit();
        while (u <= 0.0) u = stream.next_unit();
        t_ns += -std::log(u) / glitch_rate * 1e9;
        if (t_ns >= end_ns) break;
        pulses.push_back(GlitchPulse{SimTime::from_ns(static_cast<std::uint64_t>(t_ns)),
                                     cfg.glitch_duration});
    }
    return pulses;
}

void LineSignal::set(SimTime at, bool level) {
    if (!changes_.empty()) {
        if (at < changes_.back().first) {
            throw Error("line signal set in the past");
        }
        if (changes_.back().second == level) return;
        if (changes_.back().first == at) {
            changes_.back().second = level;
            return;
        }
    } else if (!level) {
        return;  // lines start low
    }
    changes_.emplace_back(at, level);
}

bool LineSignal::at(SimTime t) const {
    auto it = std::upper_bound(changes_.begin(), changes_.end(), t,
                               [](SimTime v, const auto& c) { return v < c.first; });
    if (it == changes_.begin()) return false;
    return std::prev(it)->second;
}

bool LineSignal::latest() const { return changes_.empty() ? false : changes_.back().second; }

std::size_t LineSignal::falling_edges(SimTime from, SimTime until) const {
    std::size_t n = 0;
    bool prev = at(from);
    for (const auto& [t, level] : changes_) {
        if (t < from || t >= until) {
            if (t >= until) break;
            continue;
        }
        if (prev && !level) ++n;
        prev = level;
    }
    return n;
}

std::size_t LineSignal::short_low_pulses(SimTime from, SimTime until, SimTime max_width) const {
    std::size_t n = 0;
    bool prev = at(from);
    SimTime fell_at;
    bool low = false;
    for (const auto& [t, level] : changes_) {
        if (t < from) continue;
        if (t >= until) break;
        if (prev && !level) {
            fell_at = t;
            low = true;
        } else if (low && !prev && level) {
            if (t - fell_at <= max_width) ++n;
            low = false;
        }
        prev = level;
    }
    return n;
}

Controller::Controller(Engine& engine, TraceRecorder& trace, const Config& cfg)
    : engine_(engine), trace_(trace), cfg_(cfg) {}

void Controller::set_request(SimTime at, bool level) {
    request_.set(at, level);
    trace_.record_change(at, "pta.request", level ? 1 : 0);
}

void Controller::set_priority(SimTime at, bool level) {
    priority_.set(at, level);
    trace_.record_change(at, "pta.priority", level ? 1 : 0);
}

void Controller::set_wifi_demand(bool wants_tx, bool prio_tx) {
    wifi_wants_tx_ = wants_tx;
    wifi_prio_tx_ = prio_tx;
}

void Controller::set_force_deny(bool deny) { force_deny_ = deny; }

void Controller::start(std::function<void(const Decision&)> on_decision) {
    on_decision_ = std::move(on_decision);
    engine_.repeat(engine_.now(), cfg_.sample_period, [this](SimTime at) {
        sample(at);
        return true;
    });
}

void Controller::sample(SimTime at) {
    LineState lines{request_.at(at), priority_.at(at), grant_.at(at)};
    Decision d = arbitrate_step(lines, wifi_wants_tx_, wifi_prio_tx_, cfg_, at);
    if (force_deny_ && d.winner == Winner::kBluetooth) {
        d.winner = wifi_wants_tx_ ? Winner::kWifi : Winner::kNone;
        d.reason = Reason::kForcedDeny;
    }
    // Inverted logic: GRANT goes high when a pending request is denied.
    const bool denied = lines.request && d.winner != Winner::kBluetooth;
    grant_.set(at, denied);
    trace_.record_change(at, "pta.grant", denied ? 1 : 0);
    trace_.record_change(at, "pta.decision", static_cast<std::int64_t>(d.winner));
    last_decision_ = d;
    if (on_decision_) on_decision_(d);
}

void Controller::apply_glitches(const std::vector<GlitchPulse>& pulses) {
    for (const auto& pulse : pulses) {
        engine_.schedule_at(pulse.at, [this, pulse] {
            if (!grant_.latest()) return;  // drop only visible from the denied level
            grant_.set(pulse.at, false);
            trace_.record_change(pulse.at, "pta.grant", 0);
            engine_.schedule_at(pulse.at + pulse.duration, [this, pulse] {
                grant_.set(pulse.at + pulse.duration, true);
                trace_.record_change(pulse.at + pulse.duration, "pta.grant", 1);
            });
        });
    }
}

LineState Controller::observe_lines(SimTime at, Role) const {
    const SimTime grid = quantize_down(at, cfg_.sample_period);
    return LineState{request_.at(grid), priority_.at(grid), grant_.at(grid)};
}

}  // namespace coexsim::pta
