#include "coexsim/sharedmem.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "coexsim/errors.hpp"

namespace coexsim::shmem {

namespace {

constexpr std::array<std::uint8_t, 8> kSecretMarker = {'w', 'p', 'a', '-', 'c', 'o', 'n', 'f'};

// Nonzero stamp at the start of the shared region so a mapped window is
// distinguishable from the all-zeros unmapped read.
constexpr std::array<std::uint8_t, 8> kFirmwareStamp = {0x7f, 'w', 'l', 'a', 'n', 0x13, 0x38, 0x63};

std::uint32_t load_le32(const std::vector<std::uint8_t>& bytes, std::size_t index) {
    return static_cast<std::uint32_t>(bytes[index]) |
           static_cast<std::uint32_t>(bytes[index + 1]) << 8 |
           static_cast<std::uint32_t>(bytes[index + 2]) << 16 |
           static_cast<std::uint32_t>(bytes[index + 3]) << 24;
}

}  // namespace

std::array<std::uint8_t, 4> encode_branch(std::uint32_t target) {
    return {static_cast<std::uint8_t>(target), static_cast<std::uint8_t>(target >> 8),
            static_cast<std::uint8_t>(target >> 16), static_cast<std::uint8_t>(target >> 24)};
}

std::optional<std::uint8_t> CrashLog::byte_at_dump_offset(std::uint32_t offset) const {
    if (offset < dump_base) return std::nullopt;
    const std::uint32_t index = offset - dump_base;
    if (index >= ram_dump.size()) return std::nullopt;
    return ram_dump[index];
}

std::optional<Secrets> extract_secrets(const CrashLog& log) {
    const auto& dump = log.ram_dump;
    const auto it = std::search(dump.begin(), dump.end(), kSecretMarker.begin(), kSecretMarker.end());
    if (it == dump.end()) return std::nullopt;

    std::size_t pos = static_cast<std::size_t>(it - dump.begin()) + kSecretMarker.size();
    if (pos >= dump.size()) return std::nullopt;
    const std::size_t ssid_len = dump[pos++];
    if (pos + ssid_len >= dump.size()) return std::nullopt;
    std::string ssid(dump.begin() + pos, dump.begin() + pos + ssid_len);
    pos += ssid_len;
    const std::size_t pass_len = dump[pos++];
    if (pos + pass_len > dump.size()) return std::nullopt;
    std::string pass(dump.begin() + pos, dump.begin() + pos + pass_len);
    return Secrets{std::move(ssid), std::move(pass)};
}

void export_crash_log(const CrashLog& log, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    {
        char pc_hex[16];
        std::snprintf(pc_hex, sizeof pc_hex, "%08x", log.pc);
        std::ofstream meta(dir / "metadata.json");
        meta << "{\n  \"cause\": " << log.cause << ",\n  \"pc\": \"0x" << pc_hex
             << "\",\n  \"ram_base\": " << log.ram_base << ",\n  \"dump_base\": " << log.dump_base
             << "\n}\n";
    }

    // File offset equals dump offset: zero prefix up to dump_base, then RAM.
    std::ofstream ram(dir / "SoC_RAM.bin", std::ios::binary);
    const std::vector<char> prefix(log.dump_base, 0);
    ram.write(prefix.data(), static_cast<std::streamsize>(prefix.size()));
    ram.write(reinterpret_cast<const char*>(log.ram_dump.data()),
              static_cast<std::streamsize>(log.ram_dump.size()));
}

WifiCore::WifiCore(Engine& engine, TraceRecorder& trace, Config cfg)
    : engine_(engine), trace_(trace), cfg_(std::move(cfg)) {
    for (std::uint32_t bt_addr : cfg_.exec_bt_addresses) {
        const std::uint32_t wifi = bt_to_wifi(bt_addr);
        if (wifi < kWifiRamBase || wifi + 4 > kWifiRamBase + cfg_.window_len) {
            throw ConfigError("exec_addresses", "executed word outside the shared window");
        }
    }
    ram_.assign(cfg_.window_len, 0);
}

void WifiCore::seed_ram() {
    std::fill(ram_.begin(), ram_.end(), 0);
    foreign_words_.clear();
    std::copy(kFirmwareStamp.begin(), kFirmwareStamp.end(), ram_.begin());
    for (std::uint32_t bt_addr : cfg_.exec_bt_addresses) {
        // Firmware-owned placeholder instruction; not a foreign probe.
        const auto word = encode_branch(0x00001234);
        ram_store(bt_to_wifi(bt_addr), word, false);
    }
    if (associated_) {
        std::vector<std::uint8_t> record(kSecretMarker.begin(), kSecretMarker.end());
        record.push_back(static_cast<std::uint8_t>(cfg_.ssid.size()));
        record.insert(record.end(), cfg_.ssid.begin(), cfg_.ssid.end());
        record.push_back(static_cast<std::uint8_t>(cfg_.passphrase.size()));
        record.insert(record.end(), cfg_.passphrase.begin(), cfg_.passphrase.end());
        ram_store(kWifiRamBase + cfg_.secret_offset, record, false);
    }
}

void WifiCore::power_on() {
    power_ = Power::kBooting;
    associated_ = false;
    seed_ram();
    trace_.record(engine_.now(), "shmem.map", 1);
    engine_.schedule_in(cfg_.boot_delay, [this] {
        if (power_ != Power::kBooting) return;
        power_ = Power::kOn;
        if (cfg_.associated) {
            associated_ = true;
            seed_ram();
        }
    });
}

void WifiCore::power_off() {
    power_ = Power::kOff;
    associated_ = false;
    trace_.record(engine_.now(), "shmem.map", 0);
}

void WifiCore::start_exec_checks() {
    engine_.repeat(engine_.now() + cfg_.exec_check_period, cfg_.exec_check_period,
                   [this](SimTime) {
                       execute_check();
                       return true;
                   });
}

std::uint8_t WifiCore::ram_byte(std::uint32_t wifi_addr) const {
    return ram_.at(wifi_addr - kWifiRamBase);
}

void WifiCore::ram_store(std::uint32_t wifi_addr, std::span<const std::uint8_t> data, bool foreign) {
    const std::uint32_t index = wifi_addr - kWifiRamBase;
    std::copy(data.begin(), data.end(), ram_.begin() + index);
    if (foreign) {
        const std::uint32_t first_word = wifi_addr & ~3u;
        const std::uint32_t last_word = (wifi_addr + static_cast<std::uint32_t>(data.size()) - 1) & ~3u;
        for (std::uint32_t w = first_word; w <= last_word; w += 4) foreign_words_.insert(w);
    }
}

bool WifiCore::is_valid_code(std::uint32_t target) const {
    for (const auto& [lo, hi] : cfg_.valid_code_ranges) {
        if (target >= lo && target < hi) return true;
    }
    return false;
}

std::optional<CrashLog> WifiCore::execute_check() {
    if (power_ != Power::kOn && power_ != Power::kBooting) return std::nullopt;

    std::vector<std::uint32_t> exec_sorted = cfg_.exec_bt_addresses;
    std::sort(exec_sorted.begin(), exec_sorted.end());
    for (std::uint32_t bt_addr : exec_sorted) {
        const std::uint32_t wifi = bt_to_wifi(bt_addr);
        const std::uint32_t word_addr = wifi & ~3u;
        if (!foreign_words_.count(word_addr)) continue;
        const std::uint32_t target = load_le32(ram_, word_addr - kWifiRamBase);
        if (is_valid_code(target)) continue;

        CrashLog log;
        log.cause = kTrapBranch;
        log.pc = expected_pc(target);
        log.ram_dump = ram_;
        crash_logs_.push_back(log);
        trace_.record(engine_.now(), "shmem.crash", static_cast<std::int64_t>(log.pc));

        power_ = Power::kResetting;
        trace_.record(engine_.now(), "shmem.map", 0);
        engine_.schedule_in(cfg_.reinit_delay, [this] {
            if (power_ != Power::kResetting) return;
            power_ = Power::kOn;
            associated_ = cfg_.associated;
            seed_ram();
            trace_.record(engine_.now(), "shmem.map", 1);
        });
        return log;
    }
    return std::nullopt;
}

BtWindow::BtWindow(WifiCore& core, RngStream& stream, double p_unstable)
    : core_(core), stream_(stream), p_unstable_(p_unstable) {}

void BtWindow::check_range(std::uint32_t bt_addr, std::size_t len) const {
    const std::uint64_t lo = bt_addr;
    const std::uint64_t hi = lo + len;
    if (lo < kBtWindowBase || hi > static_cast<std::uint64_t>(kBtWindowBase) + core_.window_len()) {
        throw OutOfWindowError("shared-ram access outside the window");
    }
}

void BtWindow::bt_write(std::uint32_t bt_addr, std::span<const std::uint8_t> data) {
    check_range(bt_addr, data.size());
    if (!core_.mapped()) {
        throw UnmappedError("shared-ram write while the window is unmapped");
    }
    core_.ram_store(bt_to_wifi(bt_addr), data, true);
}

BtWindow::ReadResult BtWindow::bt_read(std::uint32_t bt_addr, std::size_t len) {
    check_range(bt_addr, len);
    ReadResult result;
    if (!core_.mapped()) {
        result.kind = ReadResult::Kind::kZeros;
        result.bytes.assign(len, 0);
        return result;
    }
    const double draw = stream_.next_unit();
    if (draw < p_unstable_) {
        if (draw < p_unstable_ / 2) {
            result.kind = ReadResult::Kind::kZeros;
            result.bytes.assign(len, 0);
        } else {
            result.kind = ReadResult::Kind::kBtCrash;
        }
        return result;
    }
    result.bytes.reserve(len);
    for (std::size_t i = 0; i < len; ++i) {
        result.bytes.push_back(core_.ram_byte(bt_to_wifi(bt_addr) + static_cast<std::uint32_t>(i)));
    }
    return result;
}

CodeExecFinder::CodeExecFinder(Engine& engine, BtWindow& window, RngStream& fuzzer)
    : CodeExecFinder(engine, window, fuzzer, Options()) {}

CodeExecFinder::CodeExecFinder(Engine& engine, BtWindow& window, RngStream& fuzzer, Options options)
    : engine_(engine), window_(window), fuzzer_(fuzzer), options_(options) {}

void CodeExecFinder::start() {
    engine_.schedule_in(SimTime::from_ns(0), [this] {
        const auto probe = window_.bt_read(kBtWindowBase, 16);
        if (probe.kind == BtWindow::ReadResult::Kind::kBtCrash) {
            throw AbortedByBtCrash("initial shared-ram read crashed the Bluetooth core");
        }
        const bool all_zero =
            std::all_of(probe.bytes.begin(), probe.bytes.end(), [](std::uint8_t b) { return b == 0; });
        if (probe.kind == BtWindow::ReadResult::Kind::kZeros || all_zero) {
            // Unmapped (or indistinguishable from it): nothing to probe.
            window_absent_ = true;
            done_ = true;
            return;
        }
        crash_logs_seen_ = window_.core().crash_logs().size();
        begin_sweep();
    });
}

void CodeExecFinder::begin_sweep() {
    if (sweeps_ >= options_.max_sweeps) {
        done_ = true;
        return;
    }
    ++sweeps_;
    fill_chunk(0);
}

void CodeExecFinder::fill_chunk(std::uint32_t word_index) {
    const std::uint32_t total_words = window_.core().window_len() / 4;
    if (word_index >= total_words) {
        after_fill();
        return;
    }
    if (harvest_crashes()) return;  // crash mid-fill: cool down and re-sweep

    const std::uint32_t words_per_chunk = options_.chunk_bytes / 4;
    std::vector<std::uint8_t> chunk;
    chunk.reserve(options_.chunk_bytes);
    const std::uint32_t end = std::min(word_index + words_per_chunk, total_words);
    for (std::uint32_t w = word_index; w < end; ++w) {
        const std::uint32_t bt_addr = kBtWindowBase + w * 4;
        // Known-executable words get a valid (silent) target instead.
        const bool known = std::find(found_.begin(), found_.end(), bt_addr) != found_.end();
        const std::uint32_t target = known ? 0x00000000 : options_.probe_base | (w << 2);
        const auto word = encode_branch(target);
        chunk.insert(chunk.end(), word.begin(), word.end());
    }
    try {
        window_.bt_write(kBtWindowBase + word_index * 4, chunk);
    } catch (const UnmappedError&) {
        // The core reset under us; wait out the cool-down and restart.
        engine_.schedule_in(options_.crash_cooldown, [this] {
            if (!harvest_crashes()) begin_sweep();
        });
        return;
    }
    engine_.schedule_in(options_.chunk_interval, [this, end] { fill_chunk(end); });
}

void CodeExecFinder::after_fill() {
    // Wide margin for the execution loop to visit every region.
    const SimTime wait = SimTime::from_ms(100);
    engine_.schedule_in(wait, [this] {
        if (harvest_crashes()) return;
        done_ = true;  // a fully probed window with no trap: nothing left to find
    });
}

bool CodeExecFinder::harvest_crashes() {
    const auto& logs = window_.core().crash_logs();
    if (logs.size() == crash_logs_seen_) return false;

    for (std::size_t i = crash_logs_seen_; i < logs.size(); ++i) {
        const std::uint32_t pc = logs[i].pc;
        if ((pc & 0xfff80003u) != options_.probe_base) continue;  // not one of ours
        const std::uint32_t word_index = (pc - options_.probe_base) >> 2;
        const std::uint32_t bt_addr = kBtWindowBase + word_index * 4;
        if (std::find(found_.begin(), found_.end(), bt_addr) == found_.end()) {
            found_.push_back(bt_addr);
            std::sort(found_.begin(), found_.end());
        }
    }
    crash_logs_seen_ = logs.size();

    // Mandatory cool-down after a crash before probing again.
    engine_.schedule_in(options_.crash_cooldown, [this] { begin_sweep(); });
    return true;
}

}  // namespace coexsim::shmem
