#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "coexsim/engine.hpp"
#include "coexsim/rng.hpp"
#include "coexsim/time.hpp"
#include "coexsim/trace.hpp"

namespace coexsim::seci {

inline constexpr SimTime kD11PollPeriod = SimTime::from_us(1250);  // two 625 us clock cycles

// Register address labels, kept for trace/report readability.
inline constexpr std::uint32_t kGciInputAddr = 0x650060;
inline constexpr std::uint32_t kGciOutputAddr = 0x650160;

// Serial packet type codes carried as coexistence metadata.
inline constexpr std::uint8_t kAclKeystroke = 0x85;
inline constexpr std::uint8_t kAclEmpty = 0x05;
inline constexpr std::uint8_t kAclAudio = 0x25;  // model-assigned code for audio ACL data

enum class Core { kBluetooth, kWifi };

using Payload = std::vector<std::uint8_t>;

struct Message {
    SimTime sent_at;       // written to the sender's output register
    SimTime delivered_at;  // visible in the peer's input register
    Payload payload;       // 1..8 bytes
    Core from = Core::kBluetooth;
};

/// Wi-Fi channel/bandwidth notification byte: high nibble = channel (0..11,
/// 0 = none), low nibble = bandwidth code (2 = 20 MHz, 4 = 40 MHz).
struct ChannelNotification {
    std::uint8_t byte = 0;
    int channel = 0;
    int bandwidth_code = 2;
};

/// Throws BadChannelError if channel > 11 or bandwidth not in {20, 40}.
ChannelNotification encode_channel_notification(int channel, int bandwidth_mhz);
ChannelNotification decode_channel_notification(std::uint8_t byte);

enum class GrantState { kGrant, kReject, kInactive };

/// Grant/reject coordination for one poll round. Wi-Fi off the 2.4 GHz band
/// signals inactivity (Bluetooth sends freely); a withholding attacker
/// neither grants nor signals inactivity.
GrantState grant_cycle(bool bt_request, bool wifi_active_24ghz, bool attack_withhold);

struct Config {
    std::uint64_t baud = 3'000'000;
    std::uint64_t jitter_sigma_ns = 200;
    std::uint64_t jitter_bound_ns = 1'000;
};

/// Two-wire serial link abstracted as hardware registers: a value written to
/// one core's gci_output appears verbatim in the peer's gci_input after the
/// serialization delay (payload bits / baud) plus wire jitter.
class Link {
public:
    Link(Engine& engine, TraceRecorder& trace, RngStream& jitter, Config cfg = {});

    /// Sends 1..8 bytes; returns the delivery time at the peer.
    /// Throws OversizeError for payloads outside 1..8 bytes.
    SimTime send(Core from, std::span<const std::uint8_t> payload);

    const Payload& gci_output(Core side) const;
    const Payload& gci_input(Core side) const;

    void on_deliver(Core to, std::function<void(const Message&)> fn);

    /// All messages delivered so far in the given direction.
    const std::vector<Message>& delivered(Core from) const;

private:
    struct Side {
        Payload output{0x00};
        Payload input{0x00};
        std::function<void(const Message&)> on_deliver;
    };
    Side& side(Core c) { return c == Core::kBluetooth ? bt_ : wifi_; }
    const Side& side(Core c) const { return c == Core::kBluetooth ? bt_ : wifi_; }

    Engine& engine_;
    TraceRecorder& trace_;
    RngStream& jitter_;
    Config cfg_;
    Side bt_;
    Side wifi_;
    SimTime last_delivery_bt2wifi_;
    SimTime last_delivery_wifi2bt_;
    std::vector<Message> delivered_bt2wifi_;
    std::vector<Message> delivered_wifi2bt_;
};

/// Wi-Fi D11 core view of the Bluetooth gci_output register: polled every
/// 1.25 ms, latest value wins, values superseded entirely between two polls
/// are unobservable.
class D11Poller {
public:
    D11Poller(Engine& engine, TraceRecorder& trace, Link& link);

    void start(SimTime epoch);

    /// Latest fully delivered bt->wifi payload at `at`. Throws
    /// PreconditionError unless `at` is on the poll grid.
    Payload poll(SimTime at) const;

    const std::vector<std::pair<SimTime, Payload>>& history() const { return history_; }

private:
    Engine& engine_;
    TraceRecorder& trace_;
    Link& link_;
    SimTime epoch_;
    bool started_ = false;
    std::vector<std::pair<SimTime, Payload>> history_;
};

}  // namespace coexsim::seci
