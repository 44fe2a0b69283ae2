#include <doctest.h>

#include <vector>

#include "coexsim/devices.hpp"
#include "coexsim/errors.hpp"

using namespace coexsim;
using namespace coexsim::devices;

TEST_SUITE_BEGIN("devices");

TEST_CASE("hid_tick reports a press inside its window") {
    const auto profile = BtDeviceProfile::hid_keyboard(kHidInterval30ms);
    const auto script = KeystrokeScript::from_times({SimTime::from_ms(41)});
    CHECK(hid_tick(profile, script, SimTime::from_ms(60)) == seci::kAclKeystroke);
    CHECK(hid_tick(profile, script, SimTime::from_ms(30)) == seci::kAclEmpty);
    CHECK(hid_tick(profile, script, SimTime::from_ms(90)) == seci::kAclEmpty);
}

TEST_CASE("hid_tick: two presses in one window are indistinguishable") {
    const auto profile = BtDeviceProfile::hid_keyboard(kHidInterval30ms);
    const auto script =
        KeystrokeScript::from_times({SimTime::from_ms(35), SimTime::from_ms(45)});
    CHECK(hid_tick(profile, script, SimTime::from_ms(60)) == seci::kAclKeystroke);
    CHECK(hid_tick(profile, script, SimTime::from_ms(30)) == seci::kAclEmpty);
}

TEST_CASE("window boundaries are half-open: (at - interval, at]") {
    const auto profile = BtDeviceProfile::hid_keyboard(kHidInterval30ms);
    const auto at_boundary = KeystrokeScript::from_times({SimTime::from_ms(30)});
    CHECK(hid_tick(profile, at_boundary, SimTime::from_ms(30)) == seci::kAclKeystroke);
    CHECK(hid_tick(profile, at_boundary, SimTime::from_ms(60)) == seci::kAclEmpty);
}

TEST_CASE("keystroke script must be strictly increasing") {
    CHECK_THROWS_AS(
        KeystrokeScript::from_times({SimTime::from_ms(5), SimTime::from_ms(5)}),
        PreconditionError);
}

TEST_CASE("unsupported HID intervals are rejected") {
    CHECK_THROWS_AS(BtDeviceProfile::hid_keyboard(SimTime::from_ms(20)), ConfigError);
    CHECK(BtDeviceProfile::hid_keyboard(kHidInterval12_5ms).hid_interval ==
          SimTime::from_us(12'500));
}

TEST_CASE("beacon latches permanently on the first denied grant") {
    auto profile = BtDeviceProfile::beacon();
    CHECK(beacon_tick(profile, false, SimTime::from_ms(100)) == BeaconAction::kAdvertise);
    CHECK(beacon_tick(profile, true, SimTime::from_s(1)) == BeaconAction::kSuppressed);
    // Grants restored, minutes later: still silent.
    CHECK(beacon_tick(profile, false, SimTime::from_s(120)) == BeaconAction::kSuppressed);
    CHECK(profile.latched_stop);
}

TEST_CASE("beacon latch is absorbing under any event sequence") {
    RngStream rng(31, "fuzzer");
    for (int trial = 0; trial < 200; ++trial) {
        auto profile = BtDeviceProfile::beacon();
        bool denied_seen = false;
        for (int step = 0; step < 50; ++step) {
            const bool denied = rng.uniform(0, 9) == 0;
            denied_seen = denied_seen || denied;
            const auto action =
                beacon_tick(profile, denied, SimTime::from_ms(100 * (step + 1)));
            if (denied_seen) CHECK(action == BeaconAction::kSuppressed);
        }
    }
}

TEST_CASE("connection supervision thresholds") {
    auto profile = BtDeviceProfile::audio_stream();  // 5 s default timeout
    const SimTime now = SimTime::from_s(10);
    CHECK(connection_supervise(now - SimTime::from_ms(1), now, profile) == LinkHealth::kAlive);
    CHECK(connection_supervise(now - SimTime::from_s(2), now, profile) ==
          LinkHealth::kKeepaliveOnly);
    CHECK(connection_supervise(now - SimTime::from_s(6), now, profile) == LinkHealth::kTimedOut);
    CHECK(connection_supervise(now - SimTime::from_s(5), now, profile) == LinkHealth::kTimedOut);
}

TEST_CASE("wifi scan emits the known start sequence") {
    WifiDeviceProfile scanner;
    scanner.role = WifiDeviceProfile::Role::kScanner;
    const auto emissions = wifi_scan(scanner, SimTime::from_ms(1), 0);
    REQUIRE(emissions.size() == 3);  // two start peaks, one terminal peak
    CHECK(emissions[0].payload == kScanStartPayload);
    CHECK(emissions[0].at == SimTime::from_ms(1));
    CHECK(emissions[1].at > emissions[0].at);
    CHECK(emissions[2].at > emissions[1].at);

    const auto with_results = wifi_scan(scanner, SimTime::from_ms(1), 4);
    CHECK(with_results.size() == 7);

    WifiDeviceProfile ap;
    ap.role = WifiDeviceProfile::Role::kAccessPoint;
    CHECK(wifi_scan(ap, SimTime::from_ms(1), 4).empty());
}

TEST_CASE("hid keyboard reports on an exact interval grid") {
    Engine engine;
    TraceRecorder trace;
    RngStream jitter(5, "seci-jitter");
    seci::Link link(engine, trace, jitter);
    Medium medium(engine, trace);
    HidKeyboard keyboard(engine, trace, link, medium,
                         BtDeviceProfile::hid_keyboard(kHidInterval15ms),
                         KeystrokeScript::from_times({SimTime::from_ms(40)}), "kbd");
    keyboard.start(kHidInterval15ms);
    engine.run_until(SimTime::from_ms(200));

    // Send instants on the trace are spaced exactly one interval apart
    // (wire jitter applies to delivery, not emission).
    std::vector<std::uint64_t> sends;
    for (const auto& rec : trace.records()) {
        if (rec.channel == "seci.bt2wifi") sends.push_back(rec.at.ns());
    }
    REQUIRE(sends.size() >= 12);
    for (std::size_t i = 1; i < sends.size(); ++i) {
        CHECK(sends[i] - sends[i - 1] == kHidInterval15ms.ns());
    }
}

TEST_CASE("every resolvable press maps to exactly one keystroke report") {
    RngStream rng(17, "traffic");
    for (int trial = 0; trial < 50; ++trial) {
        const SimTime interval = kHidInterval30ms;
        std::vector<SimTime> presses;
        SimTime t = SimTime::from_ms(50);
        for (int i = 0; i < 20; ++i) {
            t += SimTime::from_ns(rng.uniform(2 * interval.ns(), 4 * interval.ns()));
            presses.push_back(t);
        }
        const auto profile = BtDeviceProfile::hid_keyboard(interval);
        const auto script = KeystrokeScript::from_times(presses);

        std::size_t keystroke_ticks = 0;
        for (SimTime tick = interval; tick <= presses.back() + interval; tick += interval) {
            if (hid_tick(profile, script, tick) == seci::kAclKeystroke) ++keystroke_ticks;
        }
        CHECK(keystroke_ticks == presses.size());
    }
}

TEST_SUITE_END();
