#include "coexsim/seci.hpp"

#include "coexsim/errors.hpp"

namespace coexsim::seci {

ChannelNotification encode_channel_notification(int channel, int bandwidth_mhz) {
    if (channel < 0 || channel > 11) {
        throw BadChannelError("channel notification: channel must be 0..11");
    }
    if (bandwidth_mhz != 20 && bandwidth_mhz != 40) {
        throw BadChannelError("channel notification: bandwidth must be 20 or 40 MHz");
    }
    ChannelNotification n;
    n.channel = channel;
    n.bandwidth_code = bandwidth_mhz == 20 ? 2 : 4;
    n.byte = static_cast<std::uint8_t>((channel << 4) | n.bandwidth_code);
    return n;
}

ChannelNotification decode_channel_notification(std::uint8_t byte) {
    ChannelNotification n;
    n.channel = byte >> 4;
    n.bandwidth_code = byte & 0x0f;
    n.byte = byte;
    if (n.channel > 11) throw BadChannelError("channel notification: channel nibble > 11");
    if (n.bandwidth_code != 2 && n.bandwidth_code != 4) {
        throw BadChannelError("channel notification: bandwidth code must be 2 or 4");
    }
    return n;
}

GrantState grant_cycle(bool /*bt_request*/, bool wifi_active_24ghz, bool attack_withhold) {
    if (!wifi_active_24ghz) return GrantState::kInactive;
    if (attack_withhold) return GrantState::kReject;
    return GrantState::kGrant;
}

Link::Link(Engine& engine, TraceRecorder& trace, RngStream& jitter, Config cfg)
    : engine_(engine), trace_(trace), jitter_(jitter), cfg_(cfg) {}

SimTime Link::send(Core from, std::span<const std::uint8_t> payload) {
    if (payload.empty() || payload.size() > 8) {
        throw OversizeError("seci send: payload must be 1..8 bytes");
    }
    const SimTime now = engine_.now();
    const Core to = from == Core::kBluetooth ? Core::kWifi : Core::kBluetooth;

    Payload bytes(payload.begin(), payload.end());
    side(from).output = bytes;

    const std::uint64_t bits = bytes.size() * 8;
    const std::uint64_t serialization_ns = bits * 1'000'000'000ull / cfg_.baud;
    const std::int64_t jitter = sample_jitter(jitter_, cfg_.jitter_sigma_ns, cfg_.jitter_bound_ns);
    SimTime delivery = shift_ns(now + SimTime::from_ns(serialization_ns), jitter);

    // A single wire cannot reorder: clamp to the previous delivery.
    SimTime& last = from == Core::kBluetooth ? last_delivery_bt2wifi_ : last_delivery_wifi2bt_;
    if (delivery <= last) delivery = last + SimTime::from_ns(1);
    last = delivery;

    const char* channel = from == Core::kBluetooth ? "seci.bt2wifi" : "seci.wifi2bt";
    trace_.record_bytes(now, channel, bytes);

    engine_.schedule_at(delivery, [this, to, from, bytes, now, delivery] {
        side(to).input = bytes;
        Message msg{now, delivery, bytes, from};
        auto& log = from == Core::kBluetooth ? delivered_bt2wifi_ : delivered_wifi2bt_;
        log.push_back(msg);
        if (side(to).on_deliver) side(to).on_deliver(msg);
    });
    return delivery;
}

const Payload& Link::gci_output(Core c) const { return side(c).output; }
const Payload& Link::gci_input(Core c) const { return side(c).input; }

void Link::on_deliver(Core to, std::function<void(const Message&)> fn) {
    side(to).on_deliver = std::move(fn);
}

const std::vector<Message>& Link::delivered(Core from) const {
    return from == Core::kBluetooth ? delivered_bt2wifi_ : delivered_wifi2bt_;
}

D11Poller::D11Poller(Engine& engine, TraceRecorder& trace, Link& link)
    : engine_(engine), trace_(trace), link_(link) {}

void D11Poller::start(SimTime epoch) {
    epoch_ = epoch;
    started_ = true;
    engine_.repeat(epoch, kD11PollPeriod, [this](SimTime at) {
        const Payload value = link_.gci_input(Core::kWifi);
        history_.emplace_back(at, value);
        trace_.record_bytes(at, "seci.d11_poll", value);
        return true;
    });
}

Payload D11Poller::poll(SimTime at) const {
    if (!started_ || at < epoch_ || (at - epoch_).ns() % kD11PollPeriod.ns() != 0) {
        throw PreconditionError("d11_poll: time must be a multiple of 1.25 ms from the poll epoch");
    }
    // The recorded history is authoritative; polls are taken by the loop.
    for (auto it = history_.rbegin(); it != history_.rend(); ++it) {
        if (it->first <= at) return it->second;
    }
    return Payload{0x00};
}

}  // namespace coexsim::seci
