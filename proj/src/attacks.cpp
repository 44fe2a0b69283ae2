#include "coexsim/attacks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "coexsim/errors.hpp"
#include "coexsim/rng.hpp"
#include "coexsim/seci.hpp"

namespace coexsim::attacks {

const char* to_string(Kind kind) {
    switch (kind) {
        case Kind::kGrantRejectDos: return "grant_reject_dos";
        case Kind::kPriorityFloodDos: return "priority_flood_dos";
        case Kind::kBleBeaconDos: return "ble_beacon_dos";
        case Kind::kKeystrokeSniff: return "keystroke_sniff";
        case Kind::kJitterClassify: return "jitter_classify";
        case Kind::kGrantGlitchObserve: return "grant_glitch_observe";
        case Kind::kSharedmemExploit: return "sharedmem_exploit";
    }
    return "?";
}

const char* to_string(AttackerCore core) {
    return core == AttackerCore::kBluetooth ? "bluetooth" : "wifi";
}

const char* to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::kSuccess: return "success";
        case Verdict::kPartial: return "partial";
        case Verdict::kFailed: return "failed";
    }
    return "?";
}

std::optional<Kind> kind_from_string(const std::string& name) {
    static constexpr std::array<Kind, 7> kinds = {
        Kind::kGrantRejectDos,   Kind::kPriorityFloodDos, Kind::kBleBeaconDos,
        Kind::kKeystrokeSniff,   Kind::kJitterClassify,   Kind::kGrantGlitchObserve,
        Kind::kSharedmemExploit,
    };
    for (Kind k : kinds) {
        if (name == to_string(k)) return k;
    }
    return std::nullopt;
}

std::optional<AttackerCore> core_from_string(const std::string& name) {
    if (name == "bluetooth") return AttackerCore::kBluetooth;
    if (name == "wifi") return AttackerCore::kWifi;
    return std::nullopt;
}

AttackerCore attacker_core_of(Kind kind) {
    switch (kind) {
        case Kind::kPriorityFloodDos:
        case Kind::kSharedmemExploit:
            return AttackerCore::kBluetooth;
        case Kind::kGrantRejectDos:
        case Kind::kBleBeaconDos:
        case Kind::kKeystrokeSniff:
        case Kind::kJitterClassify:
        case Kind::kGrantGlitchObserve:
            return AttackerCore::kWifi;
    }
    return AttackerCore::kWifi;
}

nlohmann::json Report::to_json() const {
    return nlohmann::json{
        {"kind", to_string(kind)},
        {"attacker_core", to_string(attacker_core_of(kind))},
        {"verdict", to_string(verdict)},
        {"seed", seed},
        {"duration_ns", duration.ns()},
        {"metrics", metrics},
        {"trace_path", trace_path},
    };
}

namespace {

std::string hex32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%x", v);
    return buf;
}

/// Per-run simulation state: engine, recorder, and the named rng streams.
struct RunContext {
    explicit RunContext(std::uint64_t seed)
        : pta_jitter(seed, "pta-jitter"),
          seci_jitter(seed, "seci-jitter"),
          fuzzer(seed, "fuzzer"),
          traffic(seed, "traffic") {}

    Engine engine;
    TraceRecorder trace;
    RngStream pta_jitter;
    RngStream seci_jitter;
    RngStream fuzzer;
    RngStream traffic;
};

Report make_report(Kind kind, std::uint64_t seed, SimTime duration) {
    Report r;
    r.kind = kind;
    r.seed = seed;
    r.duration = duration;
    return r;
}

/// Successful ping completions bucketed into a frames-per-second series.
std::vector<std::pair<SimTime, double>> rate_series(
    const std::vector<devices::PingStation::Sample>& samples, SimTime until, SimTime bucket) {
    std::vector<std::pair<SimTime, double>> series;
    for (SimTime t; t < until; t += bucket) {
        double completions = 0;
        for (const auto& s : samples) {
            if (s.completed && *s.completed >= t && *s.completed < t + bucket) ++completions;
        }
        series.emplace_back(t, completions * 1e9 / static_cast<double>(bucket.ns()));
    }
    return series;
}

}  // namespace

RunOutput run_grant_reject_dos(std::uint64_t seed, const GrantRejectParams& params) {
    RunContext ctx(seed);
    const SimTime window_start = params.attack_start;
    const SimTime window_end = params.attack_start + params.attack_duration;
    const SimTime run_end = window_end + params.tail;

    seci::Link link(ctx.engine, ctx.trace, ctx.seci_jitter);
    Medium medium(ctx.engine, ctx.trace);

    devices::BtDeviceProfile profile = devices::BtDeviceProfile::audio_stream();
    profile.supervision_timeout = params.supervision_timeout;
    devices::AudioStream audio(ctx.engine, ctx.trace, link, medium, profile, "bt-audio");

    // Wi-Fi attacker: stop granting without signalling inactivity.
    auto in_window = [&, window_start, window_end] {
        const SimTime now = ctx.engine.now();
        return params.attack_enabled && params.attack_duration.ns() > 0 && now >= window_start &&
               now < window_end;
    };
    audio.start([] { return true; }, in_window);

    // Cooperative Wi-Fi grant chatter; silent while the attack withholds.
    ctx.engine.repeat(SimTime::from_us(100), devices::kAclCadence, [&](SimTime) {
        if (in_window()) return true;
        link.send(seci::Core::kWifi, std::array<std::uint8_t, 2>{0xdb, 0x44});
        return true;
    });

    ctx.engine.run_until(run_end);

    // Measured from the wire: the serial link goes quiet during the attack.
    std::uint64_t wifi_msgs_in_window = 0;
    for (const auto& msg : link.delivered(seci::Core::kWifi)) {
        if (msg.sent_at >= window_start && msg.sent_at < window_end) ++wifi_msgs_in_window;
    }

    const std::uint64_t data_before = audio.data_frames_in(SimTime::from_ns(0), window_start);
    const std::uint64_t data_in = audio.data_frames_in(window_start, window_end);
    const std::uint64_t keepalives_in = audio.keepalives_in(window_start, window_end);
    const std::uint64_t data_after = audio.data_frames_in(window_end, run_end);
    const bool timed_out = audio.health() == devices::LinkHealth::kTimedOut;
    const bool expect_survival = params.attack_duration < params.supervision_timeout;

    RunOutput out;
    out.report = make_report(Kind::kGrantRejectDos, seed, run_end);
    out.report.metrics = {
        {"data_frames_before", data_before},
        {"data_frames_in_window", data_in},
        {"keepalives_in_window", keepalives_in},
        {"data_frames_after", data_after},
        {"wifi_msgs_in_window", wifi_msgs_in_window},
        {"connection", timed_out ? "timed_out" : "survived"},
        {"attack_window_ns", params.attack_duration.ns()},
    };

    if (!params.attack_enabled || params.attack_duration.ns() == 0) {
        out.report.verdict = Verdict::kFailed;
    } else if (data_in != 0) {
        out.report.verdict = data_in < data_before ? Verdict::kPartial : Verdict::kFailed;
    } else if (expect_survival) {
        const bool recovered = data_after > 0 && !timed_out && keepalives_in > 0;
        out.report.verdict = recovered ? Verdict::kSuccess : Verdict::kPartial;
    } else {
        out.report.verdict = timed_out ? Verdict::kSuccess : Verdict::kPartial;
    }
    out.trace_csv = ctx.trace.to_csv();
    return out;
}

RunOutput run_priority_flood_dos(std::uint64_t seed, const PriorityFloodParams& params) {
    RunContext ctx(seed);
    const SimTime window_start = params.attack_start;
    const SimTime window_end = params.attack_start + params.attack_duration;
    const SimTime run_end = window_end + SimTime::from_ms(200);

    Medium medium(ctx.engine, ctx.trace);
    pta::Config cfg;
    cfg.mode = params.mode;
    pta::Controller controller(ctx.engine, ctx.trace, cfg);

    devices::PingStation station(ctx.engine, ctx.trace, controller, medium, params.ping,
                                 ctx.traffic, "wifi-sta");
    controller.start([&station](const pta::Decision& d) { station.on_decision(d); });
    station.start(SimTime::from_ns(0));

    devices::RequestFlooder flooder(ctx.engine, ctx.trace, controller, medium,
                                    params.use_priority, "bt-attacker");
    if (params.attack_enabled && params.attack_duration.ns() > 0) {
        flooder.start(window_start, window_end);
    }

    ctx.engine.run_until(run_end);

    std::uint64_t issued_in = 0;
    std::uint64_t lost_in = 0;
    double delay_base_sum = 0.0, delay_attack_sum = 0.0;
    std::uint64_t delay_base_n = 0, delay_attack_n = 0;
    for (const auto& s : station.samples()) {
        const bool in_window = s.issued >= window_start && s.issued < window_end;
        if (in_window) {
            ++issued_in;
            if (!s.completed) ++lost_in;
        }
        if (s.completed) {
            const double delay = static_cast<double>(delta_ns(*s.completed, s.issued));
            if (in_window) {
                delay_attack_sum += delay;
                ++delay_attack_n;
            } else if (s.issued < window_start) {
                delay_base_sum += delay;
                ++delay_base_n;
            }
        }
    }
    const double loss_pct = issued_in ? 100.0 * static_cast<double>(lost_in) /
                                            static_cast<double>(issued_in)
                                      : 0.0;
    const double delay_base = delay_base_n ? delay_base_sum / static_cast<double>(delay_base_n) : 0;
    const double delay_attack =
        delay_attack_n ? delay_attack_sum / static_cast<double>(delay_attack_n) : 0;

    auto series = rate_series(station.samples(), run_end, SimTime::from_ms(100));
    analysis::DosOutcome outcome = analysis::detect_dos(series, {window_start, window_end});
    if (outcome == analysis::DosOutcome::kUnaffected && delay_base > 0 &&
        delay_attack > 2.0 * delay_base) {
        outcome = analysis::DosOutcome::kDegraded;  // delayed but not dropped
    }

    RunOutput out;
    out.report = make_report(Kind::kPriorityFloodDos, seed, run_end);
    out.report.metrics = {
        {"mode", pta::to_string(params.mode)},
        {"use_priority", params.use_priority},
        {"pings_in_window", issued_in},
        {"pings_lost_in_window", lost_in},
        {"loss_pct", loss_pct},
        {"mean_delay_baseline_ns", delay_base},
        {"mean_delay_attack_ns", delay_attack},
        {"outcome", analysis::to_string(outcome)},
    };
    if (!params.attack_enabled) {
        out.report.verdict = Verdict::kFailed;
    } else {
        out.report.verdict = outcome == analysis::DosOutcome::kDos        ? Verdict::kSuccess
                             : outcome == analysis::DosOutcome::kDegraded ? Verdict::kPartial
                                                                          : Verdict::kFailed;
    }
    out.trace_csv = ctx.trace.to_csv();
    return out;
}

RunOutput run_ble_beacon_dos(std::uint64_t seed, const BeaconDosParams& params) {
    RunContext ctx(seed);
    Medium medium(ctx.engine, ctx.trace);
    pta::Config cfg;
    cfg.mode = params.mode;
    pta::Controller controller(ctx.engine, ctx.trace, cfg);
    controller.start(nullptr);

    devices::BleBeacon beacon(ctx.engine, ctx.trace, controller, medium,
                              devices::BtDeviceProfile::beacon(), "bt-beacon",
                              params.adv_interval);
    beacon.start(SimTime::from_ms(50));

    if (params.attack_enabled) {
        ctx.engine.schedule_at(params.deny_at, [&] { controller.set_force_deny(true); });
        ctx.engine.schedule_at(params.restore_at, [&] { controller.set_force_deny(false); });
    }

    ctx.engine.run_until(params.observe_until);

    const std::uint64_t before = beacon.advertisements_in(SimTime::from_ns(0), params.deny_at);
    const std::uint64_t after = beacon.advertisements_in(params.deny_at, params.observe_until);
    const std::uint64_t after_restore =
        beacon.advertisements_in(params.restore_at, params.observe_until);

    RunOutput out;
    out.report = make_report(Kind::kBleBeaconDos, seed, params.observe_until);
    out.report.metrics = {
        {"adverts_before_denial", before},
        {"adverts_after_denial", after},
        {"adverts_after_restore", after_restore},
        {"latched", beacon.latched()},
        {"deny_at_ns", params.deny_at.ns()},
        {"restore_at_ns", params.restore_at.ns()},
        {"observed_grant_restored_s", (params.observe_until - params.restore_at).ns() / 1e9},
    };
    out.report.verdict = params.attack_enabled && before > 0 && after == 0 && beacon.latched()
                             ? Verdict::kSuccess
                             : Verdict::kFailed;
    out.trace_csv = ctx.trace.to_csv();
    return out;
}

namespace {

/// Attacker-side downsampling of the raw 1.25 ms poll history to one byte per
/// HID report interval. The register only changes when a report is written,
/// so the poll grid position right after each report carries that report's
/// type byte; the phase is learned from the first observed register change.
std::vector<std::pair<SimTime, std::uint8_t>> per_tick_stream(
    const std::vector<std::pair<SimTime, seci::Payload>>& polls, SimTime interval) {
    std::size_t first_change = polls.size();
    for (std::size_t i = 1; i < polls.size(); ++i) {
        if (polls[i].second != polls[i - 1].second) {
            first_change = i;
            break;
        }
    }
    std::vector<std::pair<SimTime, std::uint8_t>> stream;
    if (first_change == polls.size()) return stream;
    const std::uint64_t phase = polls[first_change].first.ns() % interval.ns();
    for (const auto& [at, payload] : polls) {
        if (at.ns() % interval.ns() != phase) continue;
        stream.emplace_back(at, payload.empty() ? std::uint8_t{0} : payload.front());
    }
    return stream;
}

}  // namespace

RunOutput run_keystroke_sniff(std::uint64_t seed, const KeystrokeSniffParams& params) {
    RunContext ctx(seed);

    std::vector<SimTime> presses = params.script;
    if (presses.empty() && params.press_count > 0) {
        // Resolvable script: press spacing uniform in [2, 4] report intervals.
        SimTime t = SimTime::from_ms(200);
        for (unsigned i = 0; i < params.press_count; ++i) {
            t += SimTime::from_ns(
                ctx.traffic.uniform(2 * params.hid_interval.ns(), 4 * params.hid_interval.ns()));
            presses.push_back(t);
        }
    }
    const SimTime last = presses.empty() ? SimTime::from_ms(100) : presses.back();
    const SimTime run_end = last + params.hid_interval + params.hid_interval + SimTime::from_ms(10);

    seci::Link link(ctx.engine, ctx.trace, ctx.seci_jitter);
    Medium medium(ctx.engine, ctx.trace);
    devices::HidKeyboard keyboard(ctx.engine, ctx.trace, link, medium,
                                  devices::BtDeviceProfile::hid_keyboard(params.hid_interval),
                                  devices::KeystrokeScript::from_times(presses), "bt-kbd");
    keyboard.start(params.hid_interval);

    seci::D11Poller poller(ctx.engine, ctx.trace, link);
    if (params.attack_enabled) poller.start(SimTime::from_ns(0));

    // Housekeeping traffic from the Wi-Fi core (channel announcement).
    ctx.engine.schedule_at(SimTime::from_ms(1), [&] {
        const auto n = seci::encode_channel_notification(6, 20);
        link.send(seci::Core::kWifi, std::array<std::uint8_t, 1>{n.byte});
    });

    ctx.engine.run_until(run_end);

    const auto stream = per_tick_stream(poller.history(), params.hid_interval);
    analysis::KeystrokeTimeline timeline = analysis::reconstruct_keystrokes(stream);
    // The value seen at a poll was delivered in the preceding poll window.
    for (auto& d : timeline.detections) d.at = d.at - seci::kD11PollPeriod;

    // Greedy in-order matching of detections to scripted presses.
    std::vector<double> errors_ns;
    std::size_t matched = 0;
    std::size_t press_idx = 0;
    std::size_t unmatched_detections = 0;
    for (const auto& det : timeline.detections) {
        bool found = false;
        while (press_idx < presses.size()) {
            const auto err = std::llabs(delta_ns(det.at, presses[press_idx]));
            if (err <= static_cast<std::int64_t>(params.hid_interval.ns())) {
                errors_ns.push_back(static_cast<double>(err));
                ++matched;
                ++press_idx;
                found = true;
                break;
            }
            if (delta_ns(presses[press_idx], det.at) > 0) break;  // press ahead of detection
            ++press_idx;
        }
        if (!found) ++unmatched_detections;
    }
    const double max_err = errors_ns.empty() ? 0.0 : *std::max_element(errors_ns.begin(), errors_ns.end());
    double mean_err = 0.0;
    for (double e : errors_ns) mean_err += e;
    if (!errors_ns.empty()) mean_err /= static_cast<double>(errors_ns.size());

    nlohmann::json timeline_json = nlohmann::json::array();
    for (const auto& d : timeline.detections) {
        timeline_json.push_back({{"t_ns", d.at.ns()}, {"confidence", d.confidence}});
    }

    RunOutput out;
    out.report = make_report(Kind::kKeystrokeSniff, seed, run_end);
    out.report.metrics = {
        {"hid_interval_ns", params.hid_interval.ns()},
        {"presses_scripted", presses.size()},
        {"detections", timeline.detections.size()},
        {"matched", matched},
        {"false_detections", unmatched_detections},
        {"max_error_ns", max_err},
        {"mean_error_ns", mean_err},
        {"timeline", timeline_json},
    };
    out.report.verdict = params.attack_enabled && !presses.empty() && matched == presses.size() &&
                                 unmatched_detections == 0
                             ? Verdict::kSuccess
                             : (matched > 0 ? Verdict::kPartial : Verdict::kFailed);
    out.trace_csv = ctx.trace.to_csv();
    return out;
}

namespace {

analysis::OffsetStats scaled_stats(analysis::TrafficClass c, double spread_scale) {
    analysis::OffsetStats s = analysis::reference_stats(c);
    s.lower_quartile = s.median + (s.lower_quartile - s.median) * spread_scale;
    s.upper_quartile = s.median + (s.upper_quartile - s.median) * spread_scale;
    s.lower_whisker = s.median + (s.lower_whisker - s.median) * spread_scale;
    s.upper_whisker = s.median + (s.upper_whisker - s.median) * spread_scale;
    return s;
}

}  // namespace

RunOutput run_jitter_classify(std::uint64_t seed, const JitterClassifyParams& params) {
    RunContext ctx(seed);
    constexpr std::array<analysis::TrafficClass, 3> classes = {
        analysis::TrafficClass::kIdle,
        analysis::TrafficClass::kIndication,
        analysis::TrafficClass::kNotification,
    };

    RunOutput out;
    out.report = make_report(Kind::kJitterClassify, seed, SimTime::from_ns(0));

    if (!params.attack_enabled || params.n_samples < params.batch_size) {
        out.report.metrics = {{"confusion", nlohmann::json::array()}, {"n_samples", params.n_samples}};
        out.report.verdict = Verdict::kFailed;
        out.trace_csv = ctx.trace.to_csv();
        return out;
    }

    // 3x3 confusion over batches of `batch_size` offsets per true class.
    std::array<std::array<unsigned, 3>, 3> confusion{};
    nlohmann::json class_stats = nlohmann::json::object();
    std::array<double, 3> per_class_accuracy{};
    for (std::size_t ci = 0; ci < classes.size(); ++ci) {
        const analysis::OffsetGenerator gen(scaled_stats(classes[ci], params.spread_scale));
        const auto samples = gen.samples(ctx.traffic, params.n_samples);

        std::vector<double> values;
        for (const auto& s : samples) values.push_back(s.offset_us);
        class_stats[analysis::to_string(classes[ci])] = {
            {"median_us", analysis::median(values)},
            {"q1_us", analysis::quantile(values, 0.25)},
            {"q3_us", analysis::quantile(values, 0.75)},
        };

        unsigned correct = 0;
        unsigned trials = 0;
        for (std::size_t start = 0; start + params.batch_size <= samples.size();
             start += params.batch_size) {
            std::vector<analysis::OffsetSample> batch(samples.begin() + start,
                                                      samples.begin() + start + params.batch_size);
            const auto cls = analysis::classify_traffic(batch);
            ++confusion[ci][static_cast<std::size_t>(cls.label)];
            ++trials;
            if (cls.label == classes[ci]) ++correct;
        }
        per_class_accuracy[ci] = trials ? static_cast<double>(correct) / trials : 0.0;
    }

    // Optional single-stream observation of one true class.
    nlohmann::json majority = nullptr;
    if (params.traffic) {
        const analysis::OffsetGenerator gen(scaled_stats(*params.traffic, params.spread_scale));
        const auto cls = analysis::classify_traffic(gen.samples(ctx.traffic, params.n_samples));
        majority = analysis::to_string(cls.label);
    }

    nlohmann::json confusion_json = nlohmann::json::array();
    nlohmann::json accuracy_json = nlohmann::json::object();
    for (std::size_t ci = 0; ci < 3; ++ci) {
        confusion_json.push_back(confusion[ci]);
        accuracy_json[analysis::to_string(classes[ci])] = per_class_accuracy[ci];
    }

    out.report.metrics = {
        {"n_samples", params.n_samples},
        {"batch_size", params.batch_size},
        {"confusion", confusion_json},
        {"per_class_accuracy", accuracy_json},
        {"sample_stats", class_stats},
        {"majority_label", majority},
    };
    const bool all_accurate = std::all_of(per_class_accuracy.begin(), per_class_accuracy.end(),
                                          [](double a) { return a >= 0.8; });
    out.report.verdict = all_accurate ? Verdict::kSuccess : Verdict::kFailed;
    out.trace_csv = ctx.trace.to_csv();
    return out;
}

RunOutput run_grant_glitch_observe(std::uint64_t seed, const GrantGlitchParams& params) {
    RunContext ctx(seed);
    Medium medium(ctx.engine, ctx.trace);
    pta::Config cfg;
    cfg.mode = params.mode;
    cfg.grant_glitch_enabled = params.attack_enabled;
    pta::Controller controller(ctx.engine, ctx.trace, cfg);
    controller.set_wifi_demand(params.load_mbps > 0.0, false);
    controller.start(nullptr);

    // Bluetooth requests throughout; the loaded Wi-Fi side keeps denying.
    devices::RequestFlooder requester(ctx.engine, ctx.trace, controller, medium, false, "bt-req");
    requester.start(SimTime::from_us(10), params.duration);

    const auto pulses = pta::inject_grant_glitch(params.load_mbps, cfg, ctx.pta_jitter,
                                                 SimTime::from_ms(50), params.duration);
    controller.apply_glitches(pulses);

    ctx.engine.run_until(params.duration);

    const std::size_t observed_drops = controller.grant_line().short_low_pulses(
        SimTime::from_ms(50), params.duration, cfg.sample_period);

    RunOutput out;
    out.report = make_report(Kind::kGrantGlitchObserve, seed, params.duration);
    out.report.metrics = {
        {"mode", pta::to_string(params.mode)},
        {"load_mbps", params.load_mbps},
        {"glitch_pulses", pulses.size()},
        {"grant_drops_observed", observed_drops},
    };
    out.report.verdict = pulses.empty() ? Verdict::kFailed : Verdict::kSuccess;
    out.trace_csv = ctx.trace.to_csv();
    return out;
}

RunOutput run_sharedmem_exploit(std::uint64_t seed, const SharedmemExploitParams& params) {
    RunContext ctx(seed);
    shmem::Config cfg;
    cfg.exec_bt_addresses = params.exec_bt_addresses;
    cfg.associated = params.associated;
    cfg.ssid = params.ssid;
    cfg.passphrase = params.passphrase;

    shmem::WifiCore core(ctx.engine, ctx.trace, cfg);
    shmem::BtWindow window(core, ctx.fuzzer, params.p_unstable);
    shmem::CodeExecFinder finder(ctx.engine, window, ctx.fuzzer);

    RunOutput out;
    out.report = make_report(Kind::kSharedmemExploit, seed, params.budget);

    bool early_boot_write_ok = false;
    if (params.wifi_on) {
        core.power_on();
        core.start_exec_checks();
        // The window is writable during early initialization, before the
        // core associates with any network.
        ctx.engine.schedule_at(SimTime::from_ms(10), [&] {
            if (params.attack_enabled && core.power() == shmem::WifiCore::Power::kBooting) {
                const std::array<std::uint8_t, 4> tag = {0xc0, 0xff, 0xee, 0x00};
                window.bt_write(shmem::kBtWindowBase + 0x100, tag);
                early_boot_write_ok = core.ram_byte(shmem::kWifiRamBase + 0x100) == 0xc0;
            }
        });
    }
    if (params.attack_enabled) {
        ctx.engine.schedule_at(SimTime::from_ms(250), [&] { finder.start(); });
    }

    bool aborted = false;
    std::optional<shmem::CrashLog> canonical_log;
    std::uint32_t planted_at = 0;
    try {
        SimTime now = ctx.engine.now();
        while (params.attack_enabled && !finder.done() && now < params.budget) {
            now = ctx.engine.run_until(now + SimTime::from_ms(500));
        }
        if (params.attack_enabled && finder.done() && !finder.found().empty()) {
            planted_at = finder.found().front();
            // Two confirmation traps at the first found region. The first
            // crash flushes the probe-littered RAM; the reboot restores a
            // regular chip state, and the second crash is the one collected
            // (its dump carries the live firmware state, credentials
            // included when associated).
            auto trap_once = [&] {
                const std::size_t logs_before = core.crash_logs().size();
                window.bt_write(planted_at, shmem::encode_branch(0xcafebabe));
                while (core.crash_logs().size() == logs_before &&
                       ctx.engine.now() < params.budget) {
                    ctx.engine.run_until(ctx.engine.now() + SimTime::from_ms(50));
                }
                return core.crash_logs().size() > logs_before;
            };
            if (trap_once()) {
                ctx.engine.run_until(ctx.engine.now() + SimTime::from_s(10));  // cool-down
                if (trap_once()) canonical_log = core.crash_logs().back();
            }
        }
    } catch (const AbortedByBtCrash&) {
        aborted = true;
    }

    std::optional<shmem::Secrets> secrets;
    bool dump_law_ok = false;
    if (canonical_log) {
        secrets = shmem::extract_secrets(*canonical_log);
        // Dump-offset law spot check: the firmware stamp at the RAM base must
        // appear at dump offset ram_base - 0x170000 (= dump_base).
        const auto b = canonical_log->byte_at_dump_offset(shmem::kWifiRamBase - shmem::kDumpDelta);
        const auto probe_byte = canonical_log->byte_at_dump_offset(
            shmem::bt_to_wifi(planted_at) - shmem::kDumpDelta);
        dump_law_ok = b.has_value() && *b == 0x7f && probe_byte.has_value() && *probe_byte == 0xbe;
    }

    nlohmann::json found_json = nlohmann::json::array();
    for (std::uint32_t addr : finder.found()) found_json.push_back(hex32(addr));
    nlohmann::json pcs_json = nlohmann::json::array();
    for (const auto& log : core.crash_logs()) pcs_json.push_back(hex32(log.pc));

    out.report.duration = ctx.engine.now();
    out.report.metrics = {
        {"found_regions", found_json},
        {"crash_pcs", pcs_json},
        {"crash_count", core.crash_logs().size()},
        {"early_boot_write_ok", early_boot_write_ok},
        {"window_absent", finder.window_absent()},
        {"aborted_by_bt_crash", aborted},
        {"canonical_pc", canonical_log ? nlohmann::json(hex32(canonical_log->pc)) : nullptr},
        {"dump_law_ok", dump_law_ok},
        {"secrets", secrets ? nlohmann::json{{"ssid", secrets->ssid},
                                             {"passphrase", secrets->passphrase}}
                            : nlohmann::json(nullptr)},
    };

    std::vector<std::uint32_t> expected = params.exec_bt_addresses;
    std::sort(expected.begin(), expected.end());
    const bool found_exact = finder.found() == expected;
    const bool canonical_ok = canonical_log && canonical_log->pc == 0xcafebabc;
    const bool secrets_ok = params.associated
                                ? (secrets && secrets->ssid == params.ssid &&
                                   secrets->passphrase == params.passphrase)
                                : !secrets;
    out.report.verdict = !aborted && params.wifi_on && found_exact && !expected.empty() &&
                                 canonical_ok && secrets_ok && dump_law_ok
                             ? Verdict::kSuccess
                             : Verdict::kFailed;
    out.trace_csv = ctx.trace.to_csv();
    out.crash_logs = core.crash_logs();
    return out;
}

}  // namespace coexsim::attacks
