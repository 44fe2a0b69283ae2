#include "coexsim/devices.hpp"

#include <algorithm>
#include <array>

#include "coexsim/errors.hpp"

namespace coexsim::devices {

namespace {

// BLE advertising frequencies 2402/2426/2480 MHz as hop indexes.
constexpr int kAdvHops[] = {0, 24, 78};

std::uint64_t count_in(const std::vector<SimTime>& times, SimTime from, SimTime until) {
    return static_cast<std::uint64_t>(std::count_if(
        times.begin(), times.end(), [&](SimTime t) { return t >= from && t < until; }));
}

}  // namespace

BtDeviceProfile BtDeviceProfile::beacon() {
    BtDeviceProfile p;
    p.role = Role::kBeacon;
    return p;
}

BtDeviceProfile BtDeviceProfile::audio_stream() {
    BtDeviceProfile p;
    p.role = Role::kAudioStream;
    return p;
}

BtDeviceProfile BtDeviceProfile::hid_keyboard(SimTime interval) {
    if (interval != kHidInterval12_5ms && interval != kHidInterval15ms &&
        interval != kHidInterval30ms) {
        throw ConfigError("hid_interval", "must be 12.5ms, 15ms or 30ms");
    }
    BtDeviceProfile p;
    p.role = Role::kHidKeyboard;
    p.hid_interval = interval;
    return p;
}

KeystrokeScript KeystrokeScript::from_times(std::vector<SimTime> times) {
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (times[i] <= times[i - 1]) {
            throw PreconditionError("keystroke script times must be strictly increasing");
        }
    }
    return KeystrokeScript{std::move(times)};
}

std::uint8_t hid_tick(const BtDeviceProfile& profile, const KeystrokeScript& script, SimTime at) {
    const SimTime window_start = at - profile.hid_interval;
    for (SimTime press : script.press_times) {
        if (press > window_start && press <= at) return seci::kAclKeystroke;
        if (press > at) break;
    }
    return seci::kAclEmpty;
}

BeaconAction beacon_tick(BtDeviceProfile& profile, bool grant_denied, SimTime /*at*/) {
    if (grant_denied) profile.latched_stop = true;
    return profile.latched_stop ? BeaconAction::kSuppressed : BeaconAction::kAdvertise;
}

LinkHealth connection_supervise(SimTime last_data_at, SimTime now, const BtDeviceProfile& profile) {
    const SimTime cadence =
        profile.role == BtDeviceProfile::Role::kHidKeyboard ? profile.hid_interval : kAclCadence;
    const SimTime gap = now - last_data_at;
    if (gap <= cadence + cadence) return LinkHealth::kAlive;
    if (gap < profile.supervision_timeout) return LinkHealth::kKeepaliveOnly;
    return LinkHealth::kTimedOut;
}

std::vector<ScanEmission> wifi_scan(const WifiDeviceProfile& profile, SimTime at,
                                    int intermediate_count) {
    std::vector<ScanEmission> out;
    if (profile.role != WifiDeviceProfile::Role::kScanner) return out;

    constexpr auto kPeakGap = SimTime::from_us(500);
    SimTime t = at;
    out.push_back({t, kScanStartPayload});
    t += kPeakGap;
    out.push_back({t, seci::Payload{0xdb, 0xe1}});
    for (int i = 0; i < intermediate_count; ++i) {
        t += kPeakGap;
        out.push_back({t, seci::Payload{0xdb, static_cast<std::uint8_t>(i + 1)}});
    }
    t += kPeakGap;
    out.push_back({t, seci::Payload{0xdb, 0x0e}});
    return out;
}

// --- HidKeyboard -------------------------------------------------------------

HidKeyboard::HidKeyboard(Engine& engine, TraceRecorder& trace, seci::Link& link, Medium& medium,
                         BtDeviceProfile profile, KeystrokeScript script, std::string id)
    : engine_(engine),
      trace_(trace),
      link_(link),
      medium_(medium),
      profile_(std::move(profile)),
      script_(std::move(script)),
      id_(std::move(id)) {}

void HidKeyboard::start(SimTime first_tick) {
    engine_.repeat(first_tick, profile_.hid_interval, [this](SimTime at) {
        const std::uint8_t code = hid_tick(profile_, script_, at);
        link_.send(seci::Core::kBluetooth, std::array<std::uint8_t, 1>{code});
        const int hop = static_cast<int>((slot_ * 17 + 3) % 79);
        medium_.begin_tx({id_, FrequencyAllocation::bluetooth(hop), at, SimTime::from_us(300), true});
        trace_.record(at, "dev." + id_ + ".tx", code);
        ++reports_;
        ++slot_;
        return true;
    });
}

// --- AudioStream -------------------------------------------------------------

AudioStream::AudioStream(Engine& engine, TraceRecorder& trace, seci::Link& link, Medium& medium,
                         BtDeviceProfile profile, std::string id)
    : engine_(engine),
      trace_(trace),
      link_(link),
      medium_(medium),
      profile_(std::move(profile)),
      id_(std::move(id)) {}

void AudioStream::start(std::function<bool()> wifi_active_24ghz,
                        std::function<bool()> attack_withhold) {
    engine_.repeat(SimTime::from_ns(0), kAclCadence,
                   [this, wifi_active = std::move(wifi_active_24ghz),
                    withhold = std::move(attack_withhold)](SimTime at) {
                       cycle(at, wifi_active(), withhold());
                       return true;
                   });
}

void AudioStream::cycle(SimTime at, bool wifi_active, bool withhold) {
    if (health_ == LinkHealth::kTimedOut) return;  // connection is gone

    const seci::GrantState state = seci::grant_cycle(true, wifi_active, withhold);
    if (state != seci::GrantState::kReject) {
        link_.send(seci::Core::kBluetooth, std::array<std::uint8_t, 1>{seci::kAclAudio});
        const int hop = static_cast<int>((slot_ * 11 + 5) % 79);
        medium_.begin_tx({id_, FrequencyAllocation::bluetooth(hop), at, SimTime::from_us(300), true});
        last_data_at_ = at;
        ++data_frames_;
        data_times_.push_back(at);
    } else {
        const LinkHealth health = connection_supervise(last_data_at_, at, profile_);
        if (health == LinkHealth::kTimedOut) {
            health_ = LinkHealth::kTimedOut;
            trace_.record(at, "dev." + id_ + ".state", 2);
            return;
        }
        if (at - last_keepalive_at_ >= kKeepaliveInterval) {
            link_.send(seci::Core::kBluetooth, std::array<std::uint8_t, 1>{seci::kAclEmpty});
            const int hop = static_cast<int>((slot_ * 11 + 5) % 79);
            medium_.begin_tx(
                {id_, FrequencyAllocation::bluetooth(hop), at, SimTime::from_us(100), true});
            last_keepalive_at_ = at;
            ++keepalives_;
            keepalive_times_.push_back(at);
        }
        if (health_ != LinkHealth::kKeepaliveOnly) {
            health_ = LinkHealth::kKeepaliveOnly;
            trace_.record(at, "dev." + id_ + ".state", 1);
        }
    }
    if (state != seci::GrantState::kReject && health_ != LinkHealth::kAlive) {
        health_ = LinkHealth::kAlive;
        trace_.record(at, "dev." + id_ + ".state", 0);
    }
    ++slot_;
}

std::uint64_t AudioStream::data_frames_in(SimTime from, SimTime until) const {
    return count_in(data_times_, from, until);
}

std::uint64_t AudioStream::keepalives_in(SimTime from, SimTime until) const {
    return count_in(keepalive_times_, from, until);
}

// --- BleBeacon ---------------------------------------------------------------

BleBeacon::BleBeacon(Engine& engine, TraceRecorder& trace, pta::Controller& controller,
                     Medium& medium, BtDeviceProfile profile, std::string id, SimTime adv_interval)
    : engine_(engine),
      trace_(trace),
      controller_(controller),
      medium_(medium),
      profile_(std::move(profile)),
      id_(std::move(id)),
      adv_interval_(adv_interval) {}

void BleBeacon::start(SimTime first_adv) {
    engine_.repeat(first_adv, adv_interval_, [this](SimTime at) {
        advertise_round(at);
        return true;
    });
}

void BleBeacon::advertise_round(SimTime at) {
    if (profile_.latched_stop) {
        beacon_tick(profile_, false, at);
        return;
    }
    controller_.set_request(at, true);
    // Sample GRANT a few sample periods after raising REQUEST, then act.
    constexpr auto kGrantCheckDelay = SimTime::from_us(30);
    engine_.schedule_at(at + kGrantCheckDelay, [this, at] {
        const SimTime check_at = at + kGrantCheckDelay;
        const bool denied = controller_.observe_lines(check_at, pta::Role::kBluetooth).grant;
        const BeaconAction action = beacon_tick(profile_, denied, check_at);
        if (action == BeaconAction::kAdvertise) {
            const int hop = kAdvHops[adv_hop_index_++ % 3];
            medium_.begin_tx({id_, FrequencyAllocation::bluetooth(hop), check_at,
                              SimTime::from_us(400), true});
            trace_.record(check_at, "dev." + id_ + ".tx", 1);
            ++adverts_;
            advert_times_.push_back(check_at);
            engine_.schedule_in(SimTime::from_us(400), [this] {
                controller_.set_request(engine_.now(), false);
            });
        } else {
            trace_.record_change(check_at, "dev." + id_ + ".state", 3);  // latched
            controller_.set_request(check_at, false);
        }
    });
}

std::uint64_t BleBeacon::advertisements_in(SimTime from, SimTime until) const {
    return count_in(advert_times_, from, until);
}

// --- PingStation -------------------------------------------------------------

PingStation::PingStation(Engine& engine, TraceRecorder& trace, pta::Controller& controller,
                         Medium& medium, Params params, RngStream& traffic, std::string id)
    : engine_(engine),
      trace_(trace),
      controller_(controller),
      medium_(medium),
      params_(params),
      id_(std::move(id)) {
    phase_offset_ = SimTime::from_ns(traffic.uniform(0, 2'499'999));
}

void PingStation::start(SimTime first_ping) {
    engine_.repeat(first_ping + phase_offset_, params_.period, [this](SimTime at) {
        issue(at);
        return true;
    });
}

void PingStation::issue(SimTime at) {
    // Previous ping still pending past its deadline is recorded as lost.
    if (pending_issue_ && at > *pending_issue_ + params_.timeout) {
        samples_.push_back({*pending_issue_, std::nullopt});
        pending_issue_.reset();
    }
    pending_issue_ = at;
    controller_.set_wifi_demand(true, false);
}

void PingStation::on_decision(const pta::Decision& decision) {
    const SimTime now = decision.at;
    if (!pending_issue_ || tx_active_) return;

    if (now > *pending_issue_ + params_.timeout) {
        samples_.push_back({*pending_issue_, std::nullopt});
        pending_issue_.reset();
        controller_.set_wifi_demand(false, false);
        return;
    }
    if (decision.winner != pta::Winner::kWifi) return;

    // Under WLAN_HIGH the controller only favours Wi-Fi during the denial
    // duty slot; start the frame only if it fits in the remaining span.
    if (controller_.config().mode == pta::Mode::kWlanHigh &&
        decision.reason == pta::Reason::kPeriodicDenial) {
        const SimTime span_end = pta::denial_span_end(controller_.config(), now);
        if (now + params_.frame_duration > span_end) return;
    }

    tx_active_ = true;
    const SimTime issued = *pending_issue_;
    medium_.begin_tx({id_, FrequencyAllocation::wifi(params_.channel, params_.bandwidth_mhz), now,
                      params_.frame_duration, true});
    engine_.schedule_at(now + params_.frame_duration, [this, issued] {
        const SimTime done = engine_.now();
        tx_active_ = false;
        if (done <= issued + params_.timeout) {
            samples_.push_back({issued, done});
        } else {
            samples_.push_back({issued, std::nullopt});
        }
        pending_issue_.reset();
        controller_.set_wifi_demand(false, false);
        trace_.record(done, "dev." + id_ + ".tx", 1);
    });
}

// --- RequestFlooder ----------------------------------------------------------

RequestFlooder::RequestFlooder(Engine& engine, TraceRecorder& trace, pta::Controller& controller,
                               Medium& medium, bool use_priority, std::string id)
    : engine_(engine),
      trace_(trace),
      controller_(controller),
      medium_(medium),
      use_priority_(use_priority),
      id_(std::move(id)) {}

void RequestFlooder::start(SimTime attack_start, SimTime attack_end) {
    attack_end_ = attack_end;
    engine_.schedule_at(attack_start, [this, attack_start] {
        controller_.set_request(attack_start, true);
        if (use_priority_) controller_.set_priority(attack_start, true);
    });
    engine_.schedule_at(attack_end, [this] {
        controller_.set_request(attack_end_, false);
        if (use_priority_) controller_.set_priority(attack_end_, false);
    });
    // Tick one sample period into each slot so the decision reflects this slot.
    const SimTime first_tick =
        quantize_down(attack_start, pta::kBtSlot) + pta::kBtSlot + pta::kSamplePeriod;
    engine_.repeat(first_tick, pta::kBtSlot, [this](SimTime at) {
        if (at >= attack_end_) return false;
        slot_tick(at);
        return true;
    });
}

void RequestFlooder::slot_tick(SimTime at) {
    ++slot_;
    if (controller_.last_decision().winner != pta::Winner::kBluetooth) return;
    const int hop = static_cast<int>((slot_ * 23 + 7) % 79);
    medium_.begin_tx({id_, FrequencyAllocation::bluetooth(hop), at, SimTime::from_us(600), true});
}

}  // namespace coexsim::devices
