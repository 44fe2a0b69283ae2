#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "coexsim/engine.hpp"
#include "coexsim/time.hpp"
#include "coexsim/trace.hpp"

namespace coexsim {

enum class Technology { kBluetooth, kWifi };

/// Spectral footprint of a transmitter in the 2.4 GHz band.
/// Wi-Fi channel c at 20 MHz spans (2407 + 5c) +/- 10 MHz, 40 MHz +/- 20 MHz;
/// Bluetooth hop k spans (2402 + k) +/- 0.5 MHz. Channel 0 means "no channel".
struct FrequencyAllocation {
    Technology technology = Technology::kBluetooth;
    int wifi_channel = 0;        // 0..11, 0 = none
    int wifi_bandwidth_mhz = 20; // 20 or 40
    int bt_hop_channel = 0;      // 0..78

    static FrequencyAllocation wifi(int channel, int bandwidth_mhz = 20);
    static FrequencyAllocation bluetooth(int hop_channel);
};

/// True iff the frequency spans of a and b intersect (closed intervals).
bool overlaps(const FrequencyAllocation& a, const FrequencyAllocation& b);

struct CollisionEvent {
    SimTime at;
    std::vector<std::string> participants;  // >= 2 device ids
};

struct TransmissionAttempt {
    std::string source;
    FrequencyAllocation alloc;
    SimTime start;
    SimTime duration;
    bool granted = false;
};

/// Shared 2.4 GHz medium. Tracks active transmissions, detects spectral
/// overlap, and records collisions: simultaneous overlapping transmissions
/// destroy each other, which is exactly what arbitration exists to prevent.
class Medium {
public:
    Medium(Engine& engine, TraceRecorder& trace);

    struct TxOutcome {
        bool collided = false;
        CollisionEvent collision;  // populated when collided
    };

    /// Starts a transmission at the current clock. Throws DuplicateSourceError
    /// if the source already has one active.
    TxOutcome begin_tx(const TransmissionAttempt& attempt);

    const std::vector<CollisionEvent>& collisions() const { return collisions_; }
    std::size_t active_count() const { return active_.size(); }

    /// Currently active attempts that have not collided.
    std::vector<TransmissionAttempt> active_clean() const;

    /// Completed, non-collided frame count per source.
    std::uint64_t delivered_frames(const std::string& source) const;

private:
    struct Active {
        TransmissionAttempt attempt;
        SimTime end;
        bool collided = false;
    };

    void expire(SimTime at);

    Engine& engine_;
    TraceRecorder& trace_;
    std::vector<Active> active_;
    std::vector<CollisionEvent> collisions_;
    std::unordered_map<std::string, std::uint64_t> delivered_;
};

}  // namespace coexsim
