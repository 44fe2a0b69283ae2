#include "coexsim/medium.hpp"

#include <algorithm>

#include "coexsim/errors.hpp"

namespace coexsim {

FrequencyAllocation FrequencyAllocation::wifi(int channel, int bandwidth_mhz) {
    FrequencyAllocation a;
    a.technology = Technology::kWifi;
    a.wifi_channel = channel;
    a.wifi_bandwidth_mhz = bandwidth_mhz;
    return a;
}

FrequencyAllocation FrequencyAllocation::bluetooth(int hop_channel) {
    FrequencyAllocation a;
    a.technology = Technology::kBluetooth;
    a.bt_hop_channel = hop_channel;
    return a;
}

namespace {

// Spans in units of 100 kHz so the 0.5 MHz Bluetooth half-width stays integral.
struct Span {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    bool empty = true;
};

Span span_of(const FrequencyAllocation& a) {
    Span s;
    if (a.technology == Technology::kWifi) {
        if (a.wifi_channel < 0 || a.wifi_channel > 11) {
            throw BadChannelError("wifi channel out of range 0..11");
        }
        if (a.wifi_channel == 0) return s;  // no channel
        const std::int64_t center = 24070 + 50 * a.wifi_channel;
        const std::int64_t half = a.wifi_bandwidth_mhz == 40 ? 200 : 100;
        s = Span{center - half, center + half, false};
    } else {
        if (a.bt_hop_channel < 0 || a.bt_hop_channel > 78) {
            throw BadChannelError("bluetooth hop channel out of range 0..78");
        }
        const std::int64_t center = 24020 + 10 * a.bt_hop_channel;
        s = Span{center - 5, center + 5, false};
    }
    return s;
}

}  // namespace

bool overlaps(const FrequencyAllocation& a, const FrequencyAllocation& b) {
    const Span sa = span_of(a);
    const Span sb = span_of(b);
    if (sa.empty || sb.empty) return false;
    return sa.lo <= sb.hi && sb.lo <= sa.hi;
}

Medium::Medium(Engine& engine, TraceRecorder& trace) : engine_(engine), trace_(trace) {}

Medium::TxOutcome Medium::begin_tx(const TransmissionAttempt& attempt) {
    if (attempt.duration.ns() == 0) throw PreconditionError("begin_tx: duration must be > 0");
    const SimTime now = engine_.now();

    for (const auto& act : active_) {
        if (act.attempt.source == attempt.source) {
            throw DuplicateSourceError("begin_tx: source '" + attempt.source +
                                       "' already transmitting");
        }
    }

    Active entry{attempt, now + attempt.duration, false};

    TxOutcome outcome;
    for (auto& act : active_) {
        if (overlaps(act.attempt.alloc, attempt.alloc)) {
            if (outcome.collision.participants.empty()) {
                outcome.collision.at = now;
                outcome.collision.participants.push_back(attempt.source);
            }
            outcome.collision.participants.push_back(act.attempt.source);
            act.collided = true;
            entry.collided = true;
        }
    }
    if (entry.collided) {
        outcome.collided = true;
        std::sort(outcome.collision.participants.begin(), outcome.collision.participants.end());
        collisions_.push_back(outcome.collision);
        trace_.record(now, "medium.collision",
                      static_cast<std::int64_t>(outcome.collision.participants.size()));
    }

    active_.push_back(std::move(entry));
    trace_.record(now, "medium.tx", static_cast<std::int64_t>(active_.size()));
    const SimTime end = now + attempt.duration;
    engine_.schedule_at(end, [this, end] { expire(end); });
    return outcome;
}

void Medium::expire(SimTime at) {
    for (auto it = active_.begin(); it != active_.end();) {
        if (it->end <= at) {
            if (!it->collided) ++delivered_[it->attempt.source];
            it = active_.erase(it);
        } else {
            ++it;
        }
    }
}

std::uint64_t Medium::delivered_frames(const std::string& source) const {
    const auto it = delivered_.find(source);
    return it == delivered_.end() ? 0 : it->second;
}

std::vector<TransmissionAttempt> Medium::active_clean() const {
    std::vector<TransmissionAttempt> out;
    for (const auto& act : active_) {
        if (!act.collided) out.push_back(act.attempt);
    }
    return out;
}

}  // namespace coexsim
