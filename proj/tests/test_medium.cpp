#include <doctest.h>

#include <vector>

#include "coexsim/engine.hpp"
#include "coexsim/errors.hpp"
#include "coexsim/medium.hpp"
#include "coexsim/rng.hpp"
#include "coexsim/trace.hpp"

using namespace coexsim;

TEST_SUITE_BEGIN("medium");

namespace {

// Independent oracle: real-valued band edges intersected directly.
struct Band {
    double lo_mhz;
    double hi_mhz;
    bool empty;
};

Band oracle_band(const FrequencyAllocation& a) {
    if (a.technology == Technology::kWifi) {
        if (a.wifi_channel == 0) return {0, 0, true};
        const double center = 2407.0 + 5.0 * a.wifi_channel;
        const double half = a.wifi_bandwidth_mhz == 40 ? 20.0 : 10.0;
        return {center - half, center + half, false};
    }
    const double center = 2402.0 + a.bt_hop_channel;
    return {center - 0.5, center + 0.5, false};
}

bool oracle_overlaps(const FrequencyAllocation& a, const FrequencyAllocation& b) {
    const Band x = oracle_band(a);
    const Band y = oracle_band(b);
    if (x.empty || y.empty) return false;
    return x.lo_mhz <= y.hi_mhz && y.lo_mhz <= x.hi_mhz;
}

FrequencyAllocation random_alloc(RngStream& rng) {
    if (rng.uniform(0, 1) == 0) {
        return FrequencyAllocation::bluetooth(static_cast<int>(rng.uniform(0, 78)));
    }
    return FrequencyAllocation::wifi(static_cast<int>(rng.uniform(0, 11)),
                                     rng.uniform(0, 1) == 0 ? 20 : 40);
}

}  // namespace

TEST_CASE("overlaps agrees with the interval oracle over all channel/hop pairs") {
    for (int ch = 1; ch <= 11; ++ch) {
        for (int bw : {20, 40}) {
            const auto wifi = FrequencyAllocation::wifi(ch, bw);
            for (int hop = 0; hop <= 78; ++hop) {
                const auto bt = FrequencyAllocation::bluetooth(hop);
                CAPTURE(ch);
                CAPTURE(bw);
                CAPTURE(hop);
                CHECK(overlaps(wifi, bt) == oracle_overlaps(wifi, bt));
                CHECK(overlaps(bt, wifi) == oracle_overlaps(bt, wifi));
            }
        }
    }
}

TEST_CASE("overlap examples from the band plan") {
    CHECK(overlaps(FrequencyAllocation::wifi(6, 20), FrequencyAllocation::bluetooth(35)));
    CHECK_FALSE(overlaps(FrequencyAllocation::wifi(1, 20), FrequencyAllocation::bluetooth(78)));
    const auto same = FrequencyAllocation::wifi(3, 20);
    CHECK(overlaps(same, same));
    // "No channel" allocations have no footprint at all.
    CHECK_FALSE(overlaps(FrequencyAllocation::wifi(0, 20), FrequencyAllocation::bluetooth(0)));
}

TEST_CASE("overlaps is symmetric for random allocation pairs") {
    RngStream rng(99, "fuzzer");
    for (int i = 0; i < 2000; ++i) {
        const auto a = random_alloc(rng);
        const auto b = random_alloc(rng);
        CHECK(overlaps(a, b) == overlaps(b, a));
    }
}

TEST_CASE("lone transmission is accepted") {
    Engine engine;
    TraceRecorder trace;
    Medium medium(engine, trace);
    const auto outcome = medium.begin_tx(
        {"ap", FrequencyAllocation::wifi(6, 20), engine.now(), SimTime::from_ms(1), true});
    CHECK_FALSE(outcome.collided);
    engine.run_until(SimTime::from_ms(2));
    CHECK(medium.delivered_frames("ap") == 1);
    CHECK(medium.collisions().empty());
}

TEST_CASE("ungranted overlap mid-frame collides with two participants") {
    Engine engine;
    TraceRecorder trace;
    Medium medium(engine, trace);
    medium.begin_tx({"ap", FrequencyAllocation::wifi(6, 20), engine.now(), SimTime::from_ms(2), false});
    engine.run_until(SimTime::from_ms(1));
    const auto outcome = medium.begin_tx(
        {"bt", FrequencyAllocation::bluetooth(35), engine.now(), SimTime::from_us(625), false});
    CHECK(outcome.collided);
    REQUIRE(medium.collisions().size() == 1);
    CHECK(medium.collisions().front().participants == std::vector<std::string>{"ap", "bt"});
    engine.run_until(SimTime::from_ms(3));
    CHECK(medium.delivered_frames("ap") == 0);
    CHECK(medium.delivered_frames("bt") == 0);
}

TEST_CASE("spectrally disjoint transmissions coexist") {
    Engine engine;
    TraceRecorder trace;
    Medium medium(engine, trace);
    medium.begin_tx({"ap", FrequencyAllocation::wifi(1, 20), engine.now(), SimTime::from_ms(2), true});
    engine.run_until(SimTime::from_ms(1));
    const auto outcome = medium.begin_tx(
        {"bt", FrequencyAllocation::bluetooth(78), engine.now(), SimTime::from_us(625), true});
    CHECK_FALSE(outcome.collided);
    engine.run_until(SimTime::from_ms(3));
    CHECK(medium.delivered_frames("ap") == 1);
    CHECK(medium.delivered_frames("bt") == 1);
}

TEST_CASE("a source cannot start two concurrent transmissions") {
    Engine engine;
    TraceRecorder trace;
    Medium medium(engine, trace);
    medium.begin_tx({"bt", FrequencyAllocation::bluetooth(3), engine.now(), SimTime::from_ms(1), true});
    CHECK_THROWS_AS(
        medium.begin_tx({"bt", FrequencyAllocation::bluetooth(40), engine.now(),
                         SimTime::from_us(10), true}),
        DuplicateSourceError);
}

TEST_CASE("honored arbitration replays the scheduling example without collisions") {
    // The textbook sequence: a BLE master/slave exchange, then a long
    // acknowledged Wi-Fi frame during which Bluetooth rests, then BLE again.
    Engine engine;
    TraceRecorder trace;
    Medium medium(engine, trace);

    engine.schedule_at(SimTime::from_us(0), [&] {
        medium.begin_tx({"ble-m", FrequencyAllocation::bluetooth(12), engine.now(),
                         SimTime::from_us(300), true});
    });
    engine.schedule_at(SimTime::from_us(625), [&] {
        medium.begin_tx({"ble-s", FrequencyAllocation::bluetooth(12), engine.now(),
                         SimTime::from_us(300), true});
    });
    // Wi-Fi data occupies the band; the shadowed BLE slots are skipped.
    engine.schedule_at(SimTime::from_us(1'250), [&] {
        medium.begin_tx({"ap", FrequencyAllocation::wifi(1, 40), engine.now(),
                         SimTime::from_us(4'000), true});
    });
    engine.schedule_at(SimTime::from_us(5'300), [&] {
        medium.begin_tx({"sta", FrequencyAllocation::wifi(1, 40), engine.now(),
                         SimTime::from_us(200), true});  // acknowledgment by the peer
    });
    engine.schedule_at(SimTime::from_us(5'625), [&] {
        medium.begin_tx({"ble-m", FrequencyAllocation::bluetooth(37), engine.now(),
                         SimTime::from_us(300), true});
    });
    engine.run_until(SimTime::from_ms(10));

    CHECK(medium.collisions().empty());
    CHECK(medium.delivered_frames("ble-m") == 2);
    CHECK(medium.delivered_frames("ap") == 1);
    CHECK(medium.delivered_frames("sta") == 1);
}

TEST_CASE("active non-collided transmissions stay pairwise disjoint") {
    RngStream rng(5, "fuzzer");
    for (int round = 0; round < 50; ++round) {
        Engine engine;
        TraceRecorder trace;
        Medium medium(engine, trace);
        for (int i = 0; i < 40; ++i) {
            engine.schedule_at(SimTime::from_ns(rng.uniform(0, 4'000'000)),
                               [&medium, &engine, &rng, i] {
                                   medium.begin_tx({"dev" + std::to_string(i), random_alloc(rng),
                                                    engine.now(),
                                                    SimTime::from_ns(rng.uniform(1, 2'000'000)),
                                                    false});
                               });
        }
        bool disjoint = true;
        engine.repeat(SimTime::from_us(100), SimTime::from_us(100), [&](SimTime) {
            const auto clean = medium.active_clean();
            for (std::size_t a = 0; a < clean.size(); ++a) {
                for (std::size_t b = a + 1; b < clean.size(); ++b) {
                    if (overlaps(clean[a].alloc, clean[b].alloc)) disjoint = false;
                }
            }
            return true;
        });
        engine.run_until(SimTime::from_ms(8));
        CHECK(disjoint);
    }
}

TEST_SUITE_END();
